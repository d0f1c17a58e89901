//! Generators for the simulation designs: stochastic block models, degree
//! corrected mixed membership models, and low-rank plus uniform-noise data
//! matrices, plus the membership-vector sets and banded connectivity matrix
//! they are built from.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;
use crate::spectra::{self, SymMatrix};

/// Row-stochastic membership matrix: row i is the probability mass vector of
/// node i over the K communities.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    k: usize,
    rows: Vec<Vec<f64>>,
}

impl MembershipMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.first().map(|r| r.len()).unwrap_or(0);
        if k == 0 {
            return Err(Error::invalid("membership matrix must be nonempty"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::invalid(format!(
                    "membership row {i} has length {} != {k}",
                    row.len()
                )));
            }
            if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(Error::invalid(format!(
                    "membership row {i} has negative or non-finite entries"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "membership row {i} sums to {s}, not 1"
                )));
            }
        }
        Ok(MembershipMatrix { k, rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Community index when the row is a pure unit vector, else None.
    pub fn pure_community(&self, i: usize) -> Option<usize> {
        let row = &self.rows[i];
        let mut idx = None;
        for (c, &p) in row.iter().enumerate() {
            if p == 1.0 {
                if idx.is_some() {
                    return None;
                }
                idx = Some(c);
            } else if p != 0.0 {
                return None;
            }
        }
        idx
    }
}

/// Pure-node membership set: the K unit vectors.
pub fn pn_set(k: usize) -> Result<Vec<Vec<f64>>> {
    if k < 1 {
        return Err(Error::invalid("pn_set requires K >= 1"));
    }
    Ok((0..k)
        .map(|c| (0..k).map(|j| if j == c { 1.0 } else { 0.0 }).collect())
        .collect())
}

/// Mixed-membership set: (x, 1-x, 0...), (1-x, x, 0...), (1/K, ..., 1/K).
pub fn mm_set(k: usize, x: f64) -> Result<Vec<Vec<f64>>> {
    if k < 2 {
        return Err(Error::invalid("mm_set requires K >= 2"));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::invalid(format!("mm_set requires x in (0,1), got {x}")));
    }
    let mut a = vec![0.0; k];
    a[0] = x;
    a[1] = 1.0 - x;
    let mut b = vec![0.0; k];
    b[0] = 1.0 - x;
    b[1] = x;
    let c = vec![1.0 / k as f64; k];
    Ok(vec![a, b, c])
}

/// Banded K x K connectivity matrix: diagonal (K+1-i)/K (1-indexed), off
/// diagonal rho^|i-j|.
pub fn band_b_matrix(k: usize, rho: f64) -> Result<Vec<Vec<f64>>> {
    if k < 1 {
        return Err(Error::invalid("band_b_matrix requires K >= 1"));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::invalid(format!(
            "band_b_matrix requires rho in [0,1), got {rho}"
        )));
    }
    Ok((0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        (k - i) as f64 / k as f64
                    } else {
                        rho.powi((i as i32 - j as i32).abs())
                    }
                })
                .collect()
        })
        .collect())
}

fn check_b(b: &[Vec<f64>]) -> Result<usize> {
    let k = b.len();
    if k == 0 || b.iter().any(|row| row.len() != k) {
        return Err(Error::invalid("B must be a nonempty square matrix"));
    }
    Ok(k)
}

/// Block-model mean H = r * Pi B Pi' for pure membership rows.
pub fn sbm_mean(pi: &MembershipMatrix, b: &[Vec<f64>], r: f64) -> Result<SymMatrix> {
    let k = check_b(b)?;
    if k != pi.k() {
        return Err(Error::invalid("B and Pi community counts differ"));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid(format!("sbm_mean requires r in (0,1), got {r}")));
    }
    let bmax = b
        .iter()
        .flatten()
        .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
    if r * bmax > 1.0 {
        return Err(Error::invalid(format!(
            "r * max(B) = {} exceeds 1; H would not be a Bernoulli mean",
            r * bmax
        )));
    }
    let n = pi.n();
    let communities: Vec<usize> = (0..n)
        .map(|i| {
            pi.pure_community(i).ok_or_else(|| {
                Error::invalid(format!("sbm_mean requires pure membership rows; row {i} is mixed"))
            })
        })
        .collect::<Result<_>>()?;
    let mut h = SymMatrix::zeros(n, true);
    for i in 0..n {
        for j in i..n {
            h.set_sym(i, j, r * b[communities[i]][communities[j]]);
        }
    }
    Ok(h)
}

/// Degree-corrected mixed-membership mean H = Theta Pi B Pi' Theta.
pub fn dcmm_mean(theta: &[f64], pi: &MembershipMatrix, b: &[Vec<f64>]) -> Result<SymMatrix> {
    let k = check_b(b)?;
    if k != pi.k() {
        return Err(Error::invalid("B and Pi community counts differ"));
    }
    let n = pi.n();
    if theta.len() != n {
        return Err(Error::invalid("theta length does not match Pi rows"));
    }
    if theta.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::invalid("theta entries must be positive and finite"));
    }
    // G = Pi B, then H_ij = theta_i theta_j (G Pi')_ij.
    let g: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..k)
                .map(|c| (0..k).map(|l| pi.row(i)[l] * b[l][c]).sum())
                .collect()
        })
        .collect();
    let mut h = SymMatrix::zeros(n, true);
    for i in 0..n {
        for j in i..n {
            let core: f64 = (0..k).map(|c| g[i][c] * pi.row(j)[c]).sum();
            let v = theta[i] * theta[j] * core;
            if v > 1.0 + 1e-12 {
                return Err(Error::invalid(format!(
                    "H[{i}][{j}] = {v} exceeds 1; not a Bernoulli mean"
                )));
            }
            h.set_sym(i, j, v.min(1.0));
        }
    }
    Ok(h)
}

/// i.i.d. Uniform[lo, hi] degree parameters, deterministic per seed.
pub fn dcmm_thetas(n: usize, lo: f64, hi: f64, seed: u64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
        return Err(Error::invalid(format!(
            "theta bounds must satisfy 0 < lo <= hi <= 1, got [{lo}, {hi}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect())
}

/// Draw a symmetric Bernoulli adjacency matrix with mean H. The diagonal is
/// always drawn (so equal seeds give identical off-diagonal patterns with
/// and without self-loops) and zeroed when `selfloops` is false.
pub fn sample_adjacency(h: &SymMatrix, selfloops: bool, seed: u64) -> Result<SymMatrix> {
    let n = h.n();
    for i in 0..n {
        for j in i..n {
            let p = h.get(i, j);
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!(
                    "H[{i}][{j}] = {p} is outside [0,1]"
                )));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = SymMatrix::zeros(n, selfloops);
    for i in 0..n {
        for j in i..n {
            let draw = rng.random::<f64>() < h.get(i, j);
            if i == j && !selfloops {
                continue;
            }
            if draw {
                x.set_sym(i, j, 1.0);
            }
        }
    }
    Ok(x)
}

/// Output of the low-rank plus uniform-noise generator.
pub struct LowRankSample {
    /// Observed matrix X = H + W (self-loop diagonal included).
    pub x: SymMatrix,
    /// Mean matrix H = V D V'.
    pub h: SymMatrix,
    /// Orthonormal factor, one column per spike.
    pub v: Vec<Vec<f64>>,
    /// Spike eigenvalues n*K, n*(K-1), ..., n.
    pub d: Vec<f64>,
}

/// Low-rank plus noise model: H = V D V' with V stacked from the top-K
/// eigenvectors of a seeded Gaussian Wigner block (largest eigenvalues) over
/// equal-sized pure membership blocks, D = n * diag(K, ..., 1), and W
/// symmetric with i.i.d. Uniform(-1,1) upper triangle including the diagonal.
pub fn lowrank_uniform(n: usize, n1: usize, k: usize, seed: u64) -> Result<LowRankSample> {
    if n1 >= n {
        return Err(Error::invalid(format!("n1 = {n1} must be < n = {n}")));
    }
    if k < 1 || k > n1 {
        return Err(Error::invalid(format!("K = {k} must satisfy 1 <= K <= n1 = {n1}")));
    }
    if (n - n1) % k != 0 {
        return Err(Error::invalid(format!(
            "K = {k} must divide n - n1 = {} for equal-sized blocks",
            n - n1
        )));
    }

    // Wigner block: symmetric, i.i.d. standard normal upper triangle.
    let wigner_seed = seeds::derive(seed, seeds::STREAM_WIGNER, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(wigner_seed);
    let mut wig = SymMatrix::zeros(n1, true);
    for i in 0..n1 {
        for j in i..n1 {
            let g: f64 = StandardNormal.sample(&mut rng);
            wig.set_sym(i, j, g);
        }
    }
    let (vals, vecs) = spectra::full_eigen_ascending(&wig, spectra::DEFAULT_TOL)?;
    // Columns for the K algebraically largest eigenvalues, largest first.
    let mut v1: Vec<Vec<f64>> = (0..k).map(|j| vecs[n1 - 1 - j].clone()).collect();
    let _ = vals;
    for col in v1.iter_mut() {
        spectra::canonicalize_in_place(col).map_err(|_| {
            Error::invalid("degenerate Wigner eigenvector")
        })?;
    }

    // V2 = sqrt(K / (n - n1)) * Pi with equal-sized pure blocks.
    let block = (n - n1) / k;
    let scale2 = (k as f64 / (n - n1) as f64).sqrt();
    let sqrt_half = std::f64::consts::FRAC_1_SQRT_2;
    let v: Vec<Vec<f64>> = (0..k)
        .map(|col| {
            let mut out = vec![0.0; n];
            for i in 0..n1 {
                out[i] = sqrt_half * v1[col][i];
            }
            for b in 0..block {
                out[n1 + col * block + b] = sqrt_half * scale2;
            }
            out
        })
        .collect();

    let d: Vec<f64> = (0..k).map(|j| (n * (k - j)) as f64).collect();

    // H = V D V'.
    let mut hdata = vec![0.0; n * n];
    for (col, vcol) in v.iter().enumerate() {
        let dj = d[col];
        for i in 0..n {
            let f = dj * vcol[i];
            if f == 0.0 {
                continue;
            }
            let row = &mut hdata[i * n..(i + 1) * n];
            for (j, r) in row.iter_mut().enumerate() {
                *r += f * vcol[j];
            }
        }
    }
    let h = SymMatrix::from_parts(n, hdata, true);

    // X = H + W with W symmetric Uniform(-1,1) including the diagonal.
    let noise_seed = seeds::derive(seed, seeds::STREAM_NOISE, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
    let mut xdata = h.as_slice().to_vec();
    for i in 0..n {
        for j in i..n {
            let w = 2.0 * rng.random::<f64>() - 1.0;
            xdata[i * n + j] += w;
            if j != i {
                xdata[j * n + i] += w;
            }
        }
    }
    let x = SymMatrix::from_parts(n, xdata, true);
    Ok(LowRankSample { x, h, v, d })
}

/// Model family plus its parameters; JSON-representable and mirrored by the
/// CLI's simulate flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Sbm {
        r: f64,
        rho: f64,
    },
    Dcmm {
        rho: f64,
        x: f64,
        n0: usize,
        theta_lo: f64,
        theta_hi: f64,
    },
    LowrankUniform {
        n1: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
    pub k: usize,
    pub selfloops: bool,
}

impl ModelSpec {
    /// Default DCMM pure-node count: 0.35 n for K = 2, 0.25 n otherwise.
    pub fn default_n0(n: usize, k: usize) -> usize {
        if k == 2 {
            (0.35 * n as f64).floor() as usize
        } else {
            (0.25 * n as f64).floor() as usize
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("model requires n >= 2"));
        }
        if self.k < 1 || self.k >= self.n {
            return Err(Error::invalid(format!(
                "model requires 1 <= K < n, got K = {}",
                self.k
            )));
        }
        match &self.family {
            Family::Sbm { r, rho } => {
                if !(*r > 0.0 && *r < 1.0) {
                    return Err(Error::invalid(format!("sbm requires r in (0,1), got {r}")));
                }
                if !(0.0..1.0).contains(rho) {
                    return Err(Error::invalid(format!(
                        "sbm requires rho in [0,1), got {rho}"
                    )));
                }
            }
            Family::Dcmm {
                rho,
                x,
                n0,
                theta_lo,
                theta_hi,
            } => {
                if self.k < 2 {
                    return Err(Error::invalid("dcmm requires K >= 2"));
                }
                if !(0.0..1.0).contains(rho) {
                    return Err(Error::invalid(format!(
                        "dcmm requires rho in [0,1), got {rho}"
                    )));
                }
                if !(*x > 0.0 && *x < 1.0) {
                    return Err(Error::invalid(format!("dcmm requires x in (0,1), got {x}")));
                }
                if self.k * *n0 > self.n {
                    return Err(Error::invalid(format!(
                        "dcmm requires K * n0 <= n, got {} > {}",
                        self.k * *n0,
                        self.n
                    )));
                }
                if !(*theta_lo > 0.0 && theta_lo <= theta_hi && *theta_hi <= 1.0) {
                    return Err(Error::invalid(format!(
                        "dcmm theta bounds must satisfy 0 < lo <= hi <= 1, got [{theta_lo}, {theta_hi}]"
                    )));
                }
            }
            Family::LowrankUniform { n1 } => {
                if *n1 >= self.n || self.k > *n1 {
                    return Err(Error::invalid(
                        "lowrank_uniform requires K <= n1 < n".to_string(),
                    ));
                }
                if (self.n - n1) % self.k != 0 {
                    return Err(Error::invalid(
                        "lowrank_uniform requires K to divide n - n1".to_string(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Equal-sized pure membership assignment; n not divisible by K assigns the
/// remainder to the first communities in order.
pub fn equal_communities(n: usize, k: usize) -> Result<MembershipMatrix> {
    if k < 1 || n < k {
        return Err(Error::invalid("equal_communities requires 1 <= K <= n"));
    }
    let pn = pn_set(k)?;
    let base = n / k;
    let rem = n % k;
    let mut rows = Vec::with_capacity(n);
    for (c, row) in pn.iter().enumerate() {
        let count = base + usize::from(c < rem);
        for _ in 0..count {
            rows.push(row.clone());
        }
    }
    MembershipMatrix::from_rows(rows)
}

/// DCMM membership layout: n0 pure nodes per community, then the remaining
/// n - K n0 nodes split across the three mixed rows, remainder round-robin.
pub fn dcmm_memberships(n: usize, k: usize, n0: usize, x: f64) -> Result<MembershipMatrix> {
    if k * n0 > n {
        return Err(Error::invalid("dcmm_memberships requires K * n0 <= n"));
    }
    let pn = pn_set(k)?;
    let mm = mm_set(k, x)?;
    let mut rows = Vec::with_capacity(n);
    for row in pn.iter() {
        for _ in 0..n0 {
            rows.push(row.clone());
        }
    }
    let mixed = n - k * n0;
    let base = mixed / 3;
    let rem = mixed % 3;
    for (idx, row) in mm.iter().enumerate() {
        let count = base + usize::from(idx < rem);
        for _ in 0..count {
            rows.push(row.clone());
        }
    }
    MembershipMatrix::from_rows(rows)
}

/// Draw one observed matrix from a model spec. For network families this is
/// a Bernoulli adjacency sample; for the low-rank family it is H + W with
/// the diagonal stripped when `selfloops` is false.
pub fn generate(spec: &ModelSpec, seed: u64) -> Result<SymMatrix> {
    spec.validate()?;
    match &spec.family {
        Family::Sbm { r, rho } => {
            let pi = equal_communities(spec.n, spec.k)?;
            let b = band_b_matrix(spec.k, *rho)?;
            let h = sbm_mean(&pi, &b, *r)?;
            sample_adjacency(&h, spec.selfloops, seed)
        }
        Family::Dcmm {
            rho,
            x,
            n0,
            theta_lo,
            theta_hi,
        } => {
            let pi = dcmm_memberships(spec.n, spec.k, *n0, *x)?;
            let b = band_b_matrix(spec.k, *rho)?;
            let theta_seed = seeds::derive(seed, seeds::STREAM_THETA, 0);
            let theta = dcmm_thetas(spec.n, *theta_lo, *theta_hi, theta_seed)?;
            let h = dcmm_mean(&theta, &pi, &b)?;
            sample_adjacency(&h, spec.selfloops, seed)
        }
        Family::LowrankUniform { n1 } => {
            let sample = lowrank_uniform(spec.n, *n1, spec.k, seed)?;
            if spec.selfloops {
                Ok(sample.x)
            } else {
                Ok(sample.x.strip_selfloops())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::dot;

    #[test]
    fn pn_set_k2() {
        assert_eq!(pn_set(2).unwrap(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(pn_set(0).is_err());
    }

    #[test]
    fn mm_set_examples() {
        let rows = mm_set(3, 0.2).unwrap();
        assert_eq!(rows[0], vec![0.2, 0.8, 0.0]);
        assert_eq!(rows[1], vec![0.8, 0.2, 0.0]);
        for v in &rows[2] {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        let rows = mm_set(2, 0.5).unwrap();
        assert_eq!(rows[0], rows[1]);
        assert!(MembershipMatrix::from_rows(rows).is_ok());
        assert!(mm_set(1, 0.2).is_err());
        assert!(mm_set(3, 0.0).is_err());
    }

    #[test]
    fn band_b_values() {
        let b = band_b_matrix(2, 0.1).unwrap();
        assert_eq!(b, vec![vec![1.0, 0.1], vec![0.1, 0.5]]);
        let b = band_b_matrix(3, 0.1).unwrap();
        assert_eq!(b[0][0], 1.0);
        assert!((b[1][1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((b[2][2] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(b[0][1], 0.1);
        assert_eq!(b[1][2], 0.1);
        assert!((b[0][2] - 0.01).abs() < 1e-15);
        assert_eq!(band_b_matrix(1, 0.5).unwrap(), vec![vec![1.0]]);
        assert!(band_b_matrix(2, 1.0).is_err());
    }

    #[test]
    fn sbm_mean_example() {
        let pi = MembershipMatrix::from_rows(vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let b = vec![vec![1.0, 0.1], vec![0.1, 0.5]];
        let h = sbm_mean(&pi, &b, 0.5).unwrap();
        assert_eq!(h.get(0, 0), 0.5);
        assert_eq!(h.get(0, 2), 0.05);
        assert_eq!(h.get(2, 2), 0.25);
        // Linearity in r.
        let h2 = sbm_mean(&pi, &b, 0.25).unwrap();
        for (a, b) in h.as_slice().iter().zip(h2.as_slice()) {
            assert!((a - 2.0 * b).abs() < 1e-15);
        }
    }

    #[test]
    fn sbm_mean_erdos_renyi_limit() {
        let pi = equal_communities(5, 1).unwrap();
        let b = vec![vec![1.0]];
        let h = sbm_mean(&pi, &b, 0.3).unwrap();
        assert!(h.as_slice().iter().all(|&v| v == 0.3));
    }

    #[test]
    fn sbm_mean_rejects_mixed_rows() {
        let pi = MembershipMatrix::from_rows(vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let b = band_b_matrix(2, 0.1).unwrap();
        assert!(sbm_mean(&pi, &b, 0.5).is_err());
    }

    #[test]
    fn dcmm_mean_examples() {
        // Theta = I with pure Pi coincides with the unscaled block mean.
        let pi = equal_communities(4, 2).unwrap();
        let b = band_b_matrix(2, 0.1).unwrap();
        let theta = vec![1.0; 4];
        let h = dcmm_mean(&theta, &pi, &b).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let ci = pi.pure_community(i).unwrap();
                let cj = pi.pure_community(j).unwrap();
                assert!((h.get(i, j) - b[ci][cj]).abs() < 1e-15);
            }
        }

        // Frozen small case: theta = (0.5, 1), K = 1, B = [[1]].
        let pi = equal_communities(2, 1).unwrap();
        let h = dcmm_mean(&[0.5, 1.0], &pi, &[vec![1.0]]).unwrap();
        assert_eq!(h.get(0, 0), 0.25);
        assert_eq!(h.get(0, 1), 0.5);
        assert_eq!(h.get(1, 1), 1.0);
    }

    #[test]
    fn dcmm_mean_scales_quadratically() {
        let pi = dcmm_memberships(9, 3, 2, 0.2).unwrap();
        let b = band_b_matrix(3, 0.1).unwrap();
        let t1: Vec<f64> = (0..9).map(|i| 0.5 + 0.05 * i as f64).collect();
        let t2: Vec<f64> = t1.iter().map(|v| 0.8 * v).collect();
        let h1 = dcmm_mean(&t1, &pi, &b).unwrap();
        let h2 = dcmm_mean(&t2, &pi, &b).unwrap();
        for (a, b) in h1.as_slice().iter().zip(h2.as_slice()) {
            assert!((0.64 * a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn dcmm_mean_rejects_out_of_range() {
        let pi = equal_communities(2, 1).unwrap();
        assert!(dcmm_mean(&[2.0, 1.0], &pi, &[vec![1.0]]).is_err());
        assert!(dcmm_mean(&[0.5, -1.0], &pi, &[vec![1.0]]).is_err());
    }

    #[test]
    fn thetas_degenerate_and_deterministic() {
        let t = dcmm_thetas(10, 0.7, 0.7, 1).unwrap();
        assert!(t.iter().all(|&v| v == 0.7));
        assert_eq!(
            dcmm_thetas(10, 0.5, 1.0, 9).unwrap(),
            dcmm_thetas(10, 0.5, 1.0, 9).unwrap()
        );
        assert!(dcmm_thetas(10, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn thetas_sample_mean() {
        let n = 100_000;
        let t = dcmm_thetas(n, 0.5, 1.0, 2).unwrap();
        let mean: f64 = t.iter().sum::<f64>() / n as f64;
        let bound = 4.0 * 0.5 / (12.0 * n as f64).sqrt();
        assert!((mean - 0.75).abs() <= bound, "mean {mean}");
    }

    #[test]
    fn adjacency_degenerate_means() {
        let h = SymMatrix::zeros(4, true);
        let x = sample_adjacency(&h, true, 0).unwrap();
        assert!(x.as_slice().iter().all(|&v| v == 0.0));

        let mut h1 = SymMatrix::zeros(3, true);
        for i in 0..3 {
            for j in i..3 {
                h1.set_sym(i, j, 1.0);
            }
        }
        let x = sample_adjacency(&h1, true, 0).unwrap();
        assert!(x.as_slice().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn adjacency_diag_respects_flag_and_pairs_with_stripped() {
        let pi = equal_communities(20, 2).unwrap();
        let b = band_b_matrix(2, 0.1).unwrap();
        let h = sbm_mean(&pi, &b, 0.5).unwrap();
        let with = sample_adjacency(&h, true, 11).unwrap();
        let without = sample_adjacency(&h, false, 11).unwrap();
        assert!(with.has_selfloops());
        assert!(!without.has_selfloops());
        assert_eq!(with.strip_selfloops().as_slice(), without.as_slice());
        for i in 0..20 {
            assert_eq!(without.get(i, i), 0.0);
        }
        for v in with.as_slice() {
            assert!(*v == 0.0 || *v == 1.0);
        }
    }

    #[test]
    fn adjacency_moment_check() {
        // Fixed (i,j): empirical frequency across seeded draws within
        // 4 sqrt(p(1-p)/R) of H_ij.
        let mut h = SymMatrix::zeros(3, false);
        h.set_sym(0, 1, 0.37);
        let reps = 10_000;
        let mut count = 0;
        for s in 0..reps {
            let x = sample_adjacency(&h, false, s).unwrap();
            if x.get(0, 1) == 1.0 {
                count += 1;
            }
        }
        let freq = count as f64 / reps as f64;
        let bound = 4.0 * (0.37f64 * 0.63 / reps as f64).sqrt();
        assert!((freq - 0.37).abs() <= bound, "freq {freq}");
    }

    #[test]
    fn adjacency_rejects_bad_mean() {
        let mut h = SymMatrix::zeros(2, false);
        h.set_sym(0, 1, 1.2);
        assert!(sample_adjacency(&h, false, 0).is_err());
    }

    #[test]
    fn lowrank_construction_invariants() {
        let s = lowrank_uniform(60, 30, 2, 5).unwrap();
        // Columns of V are orthonormal.
        for a in 0..2 {
            for b in 0..2 {
                let g = dot(&s.v[a], &s.v[b]);
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((g - want).abs() <= 1e-8, "gram ({a},{b}) = {g}");
            }
        }
        // Eigenvalues of H are n*K, ..., n within 1e-6 relative.
        let dec = crate::spectra::eigs_topk(&s.h, 2, crate::spectra::DEFAULT_TOL).unwrap();
        assert!((dec.eigenvalue(0) - 120.0).abs() / 120.0 <= 1e-6);
        assert!((dec.eigenvalue(1) - 60.0).abs() / 60.0 <= 1e-6);
        assert!(s.x.has_selfloops());
        // Noise is bounded by 1 entrywise.
        for (xi, hi) in s.x.as_slice().iter().zip(s.h.as_slice()) {
            assert!((xi - hi).abs() <= 1.0);
        }
    }

    #[test]
    fn lowrank_validates() {
        assert!(lowrank_uniform(10, 10, 2, 0).is_err()); // n1 == n
        assert!(lowrank_uniform(10, 5, 3, 0).is_err()); // 5 % 3 != 0
        assert!(lowrank_uniform(10, 2, 3, 0).is_err()); // K > n1
        assert!(lowrank_uniform(12, 6, 2, 0).is_ok());
    }

    #[test]
    fn generate_determinism() {
        let spec = ModelSpec {
            family: Family::Sbm { r: 0.5, rho: 0.1 },
            n: 30,
            k: 2,
            selfloops: false,
        };
        let a = generate(&spec, 42).unwrap();
        let b = generate(&spec, 42).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn model_spec_json_roundtrip() {
        let spec = ModelSpec {
            family: Family::Dcmm {
                rho: 0.1,
                x: 0.2,
                n0: 350,
                theta_lo: 0.5,
                theta_hi: 1.0,
            },
            n: 1000,
            k: 2,
            selfloops: false,
        };
        let s = serde_json::to_string(&spec).unwrap();
        assert!(s.contains("\"family\":\"dcmm\""));
        let back: ModelSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn membership_layouts() {
        let pi = equal_communities(7, 3).unwrap();
        // Remainder to the first community in order: sizes 3, 2, 2.
        let sizes: Vec<usize> = (0..3)
            .map(|c| (0..7).filter(|&i| pi.pure_community(i) == Some(c)).count())
            .collect();
        assert_eq!(sizes, vec![3, 2, 2]);

        let pi = dcmm_memberships(10, 2, 2, 0.2).unwrap();
        // 4 pure nodes, 6 mixed: 2 per mixed row.
        assert_eq!(pi.n(), 10);
        assert_eq!(pi.pure_community(0), Some(0));
        assert_eq!(pi.pure_community(3), Some(1));
        assert_eq!(pi.row(4), &[0.2, 0.8]);
        assert_eq!(pi.row(6), &[0.8, 0.2]);
        assert_eq!(pi.row(8), &[0.5, 0.5]);
    }
}
