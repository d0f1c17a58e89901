//! The rank test itself: residual construction, the subsampled statistic,
//! the diagonal statistic for self-loop data, selection and validation of
//! the subsampling parameter m, and the accept/reject decision.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{normal_cdf, normal_quantile};
use crate::spectra::{eigs_topk, SpectralDecomposition, SymMatrix, DEFAULT_TOL};

/// Which statistic a test outcome was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Bernoulli(1/m)-subsampled sum of off-diagonal residual entries.
    Subsampled,
    /// Sum of residual diagonal entries; valid only with self-loop data.
    Diagonal,
    /// The m = 1 full-sum statistic. Not a valid test (its variance
    /// degenerates when a spike direction aligns with the all-ones vector);
    /// kept as a diagnostic.
    FullsumDiagnostic,
}

/// Symmetric Bernoulli(1/m) indicator set over unordered off-diagonal pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsampleMask {
    n: usize,
    pairs: Vec<(u32, u32)>,
    m: f64,
    seed: u64,
}

impl SubsampleMask {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Sampled unordered pairs, each with i < j.
    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Rebuild the mask under a node relabeling: pair {i,j} becomes
    /// {perm[i], perm[j]}. The statistic is equivariant under this (paired
    /// with `SymMatrix::permuted`).
    pub fn permuted(&self, perm: &[usize]) -> SubsampleMask {
        assert_eq!(perm.len(), self.n);
        let pairs = self
            .pairs
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (perm[i as usize] as u32, perm[j as usize] as u32);
                if a < b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
        SubsampleMask {
            n: self.n,
            pairs,
            m: self.m,
            seed: self.seed,
        }
    }
}

/// Draw a symmetric Bernoulli(1/m) mask over the n(n-1)/2 unordered
/// off-diagonal pairs. Deterministic per (n, m, seed); never a function of
/// the data matrix.
pub fn sample_mask(n: usize, m: f64, seed: u64) -> Result<SubsampleMask> {
    if n < 2 {
        return Err(Error::invalid(format!("mask requires n >= 2, got {n}")));
    }
    if !(m.is_finite() && m >= 1.0) {
        return Err(Error::invalid(format!(
            "subsampling parameter m must be >= 1 (P(Y=1) = 1/m), got {m}"
        )));
    }
    let p = 1.0 / m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            if rng.random::<f64>() < p {
                pairs.push((i, j));
            }
        }
    }
    Ok(SubsampleMask { n, pairs, m, seed })
}

/// Neumaier compensated summation.
#[derive(Default, Clone, Copy)]
pub(crate) struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.c
    }
}

/// Residual after removing the top-k0 spectral components:
/// W = X - sum_{k<=k0} d_k v_k v_k'. The self-loop flag is inherited from X
/// as provenance (the residual diagonal is a projection artifact, not data).
pub fn residual(x: &SymMatrix, decomp: &SpectralDecomposition, k0: usize) -> Result<SymMatrix> {
    if k0 > decomp.k() {
        return Err(Error::invalid(format!(
            "k0 = {k0} exceeds the {} extracted pairs",
            decomp.k()
        )));
    }
    let n = x.n();
    if decomp.k() > 0 && decomp.eigenvector(0).len() != n {
        return Err(Error::invalid(format!(
            "decomposition dimension {} does not match matrix dimension {n}",
            decomp.eigenvector(0).len()
        )));
    }
    let mut data = x.as_slice().to_vec();
    for k in 0..k0 {
        let d = decomp.eigenvalue(k);
        let v = decomp.eigenvector(k);
        for i in 0..n {
            let dvi = d * v[i];
            let row = &mut data[i * n..(i + 1) * n];
            for (j, r) in row.iter_mut().enumerate() {
                *r -= dvi * v[j];
            }
        }
    }
    Ok(SymMatrix::from_parts(n, data, x.has_selfloops()))
}

// Sum of squared off-diagonal entries over ordered pairs, compensated.
fn offdiag_sum_squares(w: &SymMatrix) -> f64 {
    let n = w.n();
    let mut acc = Kahan::default();
    for i in 0..n {
        let row = w.row(i);
        for (j, &v) in row.iter().enumerate() {
            if j != i {
                acc.add(v * v);
            }
        }
    }
    acc.total()
}

/// The subsampled statistic
/// T = sqrt(m) * sum_{i != j} w_ij Y_ij / sqrt(2 sum_{i != j} w_ij^2).
/// The numerator runs over ordered pairs, so each sampled unordered pair
/// contributes twice its entry; the denominator runs over all ordered
/// off-diagonal pairs regardless of the mask.
pub fn statistic_subsampled(w_hat: &SymMatrix, mask: &SubsampleMask) -> Result<f64> {
    if mask.n() != w_hat.n() {
        return Err(Error::invalid(format!(
            "mask dimension {} does not match matrix dimension {}",
            mask.n(),
            w_hat.n()
        )));
    }
    let denom_sq = offdiag_sum_squares(w_hat);
    if denom_sq == 0.0 {
        return Err(Error::DegenerateDenominator(
            "all off-diagonal residual entries are zero (exact low-rank fit)".into(),
        ));
    }
    let mut num = Kahan::default();
    for &(i, j) in mask.pairs() {
        num.add(2.0 * w_hat.get(i as usize, j as usize));
    }
    Ok(mask.m().sqrt() * num.total() / (2.0 * denom_sq).sqrt())
}

/// The diagonal statistic T = sum_i w_ii / sqrt(sum_i w_ii^2), defined only
/// when the matrix diagonal carries data (self-loops).
pub fn statistic_diagonal(w_hat: &SymMatrix) -> Result<f64> {
    if !w_hat.has_selfloops() {
        return Err(Error::InvalidVariant(
            "diagonal statistic requires self-loop data; the diagonal of this matrix is not data-bearing".into(),
        ));
    }
    let n = w_hat.n();
    let mut num = Kahan::default();
    let mut den = Kahan::default();
    for i in 0..n {
        let v = w_hat.get(i, i);
        num.add(v);
        den.add(v * v);
    }
    let den = den.total();
    if den == 0.0 {
        return Err(Error::DegenerateDenominator(
            "all residual diagonal entries are zero".into(),
        ));
    }
    Ok(num.total() / den.sqrt())
}

/// The m = 1 full-sum statistic: identical by definition to
/// `statistic_subsampled` with the full mask. Documented as a diagnostic,
/// not a valid test.
pub fn statistic_fullsum(w_hat: &SymMatrix) -> Result<f64> {
    let full = sample_mask(w_hat.n(), 1.0, 0)?;
    statistic_subsampled(w_hat, &full)
}

/// The default subsampling parameter m = sqrt(n).
pub fn default_m(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("default_m requires n >= 2, got {n}")));
    }
    Ok((n as f64).sqrt())
}

/// Which admissibility window a warning refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskWindow {
    /// Window depending on the entry-variance proxy theta:
    /// (n^eps / theta) log n + n^(eps-1) theta^-2 (log n)^2 << m << n^2 theta (log n)^-2.
    DensityBased,
    /// The theta-free sufficient window n^(1-eps) << m << n^(1+2 eps) / log n.
    Sufficient,
}

/// Non-fatal advice about the choice of m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MWarning {
    /// m = 1 disables subsampling entirely; the full-sum statistic is known
    /// to have a degenerate variance in common designs.
    SubsamplingDisabled,
    /// m sits more than a factor of 10 below the window's lower bound.
    BelowWindow { window: MaskWindow, bound: f64, m: f64 },
    /// m sits more than a factor of 10 above the window's upper bound.
    AboveWindow { window: MaskWindow, bound: f64, m: f64 },
}

impl std::fmt::Display for MWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MWarning::SubsamplingDisabled => {
                write!(f, "m = 1 disables subsampling; the full-sum statistic has a degenerate variance in common designs")
            }
            MWarning::BelowWindow { window, bound, m } => write!(
                f,
                "m = {m:.4} is more than 10x below the {window:?} window lower bound {bound:.4}"
            ),
            MWarning::AboveWindow { window, bound, m } => write!(
                f,
                "m = {m:.4} is more than 10x above the {window:?} window upper bound {bound:.4}"
            ),
        }
    }
}

/// Check m against the two asymptotic admissibility windows. "Much smaller
/// than" is read with one order of magnitude of slack: a warning fires only
/// when a bound is violated by more than a factor of 10. Returns warnings,
/// never errors, except for invalid arguments.
pub fn validate_m(n: usize, m: f64, theta_hat: f64, eps: f64) -> Result<Vec<MWarning>> {
    if n < 2 {
        return Err(Error::invalid("validate_m requires n >= 2"));
    }
    if !(m.is_finite() && m >= 1.0) {
        return Err(Error::invalid(format!("m must be >= 1, got {m}")));
    }
    if !(theta_hat > 0.0 && theta_hat <= 1.0) {
        return Err(Error::invalid(format!(
            "theta_hat must lie in (0, 1], got {theta_hat}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }

    let mut warnings = Vec::new();
    if m == 1.0 {
        warnings.push(MWarning::SubsamplingDisabled);
    }
    let nf = n as f64;
    let ln = nf.ln();
    let windows = [
        (
            MaskWindow::DensityBased,
            nf.powf(eps) / theta_hat * ln + nf.powf(eps - 1.0) / (theta_hat * theta_hat) * ln * ln,
            nf * nf * theta_hat / (ln * ln),
        ),
        (
            MaskWindow::Sufficient,
            nf.powf(1.0 - eps),
            nf.powf(1.0 + 2.0 * eps) / ln,
        ),
    ];
    for (window, lower, upper) in windows {
        if lower > 10.0 * m {
            warnings.push(MWarning::BelowWindow {
                window,
                bound: lower,
                m,
            });
        }
        if m > 10.0 * upper {
            warnings.push(MWarning::AboveWindow {
                window,
                bound: upper,
                m,
            });
        }
    }
    Ok(warnings)
}

/// Statistic value, p-value, decision, and full provenance for one test of
/// `H0: rank = k0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub variant: Variant,
    pub k0: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_sampled_pairs: Option<usize>,
    /// Set when the drawn mask contained no pairs (statistic forced to 0).
    #[serde(default)]
    pub empty_mask: bool,
    /// Set when the residual was exactly zero (statistic undefined); the
    /// sequential sweep treats this as acceptance since an exactly-zero
    /// residual certifies rank <= k0.
    #[serde(default)]
    pub degenerate: bool,
}

impl TestOutcome {
    pub(crate) fn from_statistic(
        variant: Variant,
        k0: usize,
        statistic: f64,
        alpha: f64,
    ) -> Result<TestOutcome> {
        let threshold = normal_quantile(1.0 - alpha / 2.0)?;
        let p_value = 2.0 * (1.0 - normal_cdf(statistic.abs()));
        Ok(TestOutcome {
            variant,
            k0,
            statistic,
            p_value,
            alpha,
            reject: statistic.abs() >= threshold,
            m: None,
            seed: None,
            n_sampled_pairs: None,
            empty_mask: false,
            degenerate: false,
        })
    }
}

fn check_test_args(x: &SymMatrix, k0: usize, alpha: f64) -> Result<()> {
    if k0 < 1 || k0 >= x.n() {
        return Err(Error::invalid(format!(
            "k0 must satisfy 1 <= k0 < n = {}, got {k0}",
            x.n()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// Test `H0: rank = k0` at level alpha. The variant is auto-selected: the
/// diagonal statistic when the matrix carries self-loops, otherwise the
/// subsampled statistic with parameter m and the given mask seed.
pub fn test_rank(x: &SymMatrix, k0: usize, alpha: f64, m: f64, seed: u64) -> Result<TestOutcome> {
    let variant = if x.has_selfloops() {
        Variant::Diagonal
    } else {
        Variant::Subsampled
    };
    test_rank_with_variant(x, variant, k0, alpha, m, seed)
}

/// Test with an explicit statistic variant (overriding auto-selection).
pub fn test_rank_with_variant(
    x: &SymMatrix,
    variant: Variant,
    k0: usize,
    alpha: f64,
    m: f64,
    seed: u64,
) -> Result<TestOutcome> {
    check_test_args(x, k0, alpha)?;
    let decomp = eigs_topk(x, k0, DEFAULT_TOL)?;
    let w = residual(x, &decomp, k0)?;
    match variant {
        Variant::Subsampled => {
            let mask = sample_mask(x.n(), m, seed)?;
            let statistic = statistic_subsampled(&w, &mask)?;
            let mut out = TestOutcome::from_statistic(variant, k0, statistic, alpha)?;
            out.m = Some(m);
            out.seed = Some(seed);
            out.n_sampled_pairs = Some(mask.len());
            out.empty_mask = mask.is_empty();
            Ok(out)
        }
        Variant::Diagonal => {
            let statistic = statistic_diagonal(&w)?;
            TestOutcome::from_statistic(variant, k0, statistic, alpha)
        }
        Variant::FullsumDiagnostic => {
            let statistic = statistic_fullsum(&w)?;
            let mut out = TestOutcome::from_statistic(variant, k0, statistic, alpha)?;
            out.m = Some(1.0);
            Ok(out)
        }
    }
}
