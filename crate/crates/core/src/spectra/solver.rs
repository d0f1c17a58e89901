//! Dense symmetric eigensolver internals.
//!
//! The route is the classic one: Householder reduction to tridiagonal form,
//! implicit-shift QL for the eigenvalues (derived from the Algol procedures
//! tql1/tql2 of Bowdler, Martin, Reinsch and Wilkinson and their EISPACK
//! translations), then either QL accumulation of the full eigenvector matrix
//! or, when only a few pairs are requested from a large matrix, inverse
//! iteration on the tridiagonal followed by back-transformation through the
//! stored reflectors.

use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;

/// Result of the Householder reduction. The reflector for elimination step
/// `i` lives in `reflectors[i*n .. i*n+i]`, with scalar `h[i]`; `h[i] == 0`
/// marks a skipped (already zero) step.
pub(crate) struct Tridiagonal {
    pub n: usize,
    pub diag: Vec<f64>,
    pub sub: Vec<f64>, // sub[i] = T[i+1][i], length n-1
    reflectors: Vec<f64>,
    h: Vec<f64>,
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub(crate) fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Householder reduction of a full symmetric row-major matrix. Consumes the
/// buffer; the strict lower rows are reused as reflector storage.
pub(crate) fn tridiagonalize(n: usize, mut a: Vec<f64>) -> Tridiagonal {
    debug_assert_eq!(a.len(), n * n);
    let mut sub = vec![0.0; n.saturating_sub(1)];
    let mut h = vec![0.0; n];
    let mut p = vec![0.0; n];

    for i in (1..n).rev() {
        // Split so rows 0..i and row i can be borrowed disjointly.
        let (block, row_i) = a.split_at_mut(i * n);
        let u = &mut row_i[..i];

        let scale: f64 = u.iter().map(|x| x.abs()).sum();
        if scale == 0.0 {
            sub[i - 1] = 0.0;
            h[i] = 0.0;
            continue;
        }
        let inv_scale = 1.0 / scale;
        for x in u.iter_mut() {
            *x *= inv_scale;
        }
        let mut hi = dot(u, u);
        let f = u[i - 1];
        let g = if f > 0.0 { -hi.sqrt() } else { hi.sqrt() };
        sub[i - 1] = scale * g;
        hi -= f * g;
        u[i - 1] = f - g;
        h[i] = hi;

        // p = A_block * u / h over full symmetric rows, then the symmetric
        // rank-2 update A -= u w' + w u' with w = p - (u.p / 2h) u.
        let inv_h = 1.0 / hi;
        for j in 0..i {
            p[j] = dot(&block[j * n..j * n + i], u) * inv_h;
        }
        let kappa = dot(&p[..i], u) * (0.5 * inv_h);
        for j in 0..i {
            p[j] -= kappa * u[j];
        }
        for j in 0..i {
            let row = &mut block[j * n..j * n + i];
            let (uj, wj) = (u[j], p[j]);
            for (k, r) in row.iter_mut().enumerate() {
                *r -= uj * p[k] + wj * u[k];
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|j| a[j * n + j]).collect();
    Tridiagonal {
        n,
        diag,
        sub,
        reflectors: a,
        h,
    }
}

impl Tridiagonal {
    /// Apply the accumulated orthogonal factor Q to a coordinate vector of
    /// the tridiagonal basis, yielding the original-basis vector.
    pub(crate) fn apply_q(&self, z: &mut [f64]) {
        debug_assert_eq!(z.len(), self.n);
        for i in 1..self.n {
            let hi = self.h[i];
            if hi == 0.0 {
                continue;
            }
            let u = &self.reflectors[i * self.n..i * self.n + i];
            let s = dot(u, &z[..i]) / hi;
            axpy(&mut z[..i], -s, u);
        }
    }

    /// Accumulate Q into a row-major identity buffer (columns of the result
    /// are then updated in place by the QL sweep).
    pub(crate) fn accumulate_q(&self) -> Vec<f64> {
        let n = self.n;
        let mut z = vec![0.0; n * n];
        for j in 0..n {
            z[j * n + j] = 1.0;
        }
        let mut t = vec![0.0; n];
        for i in 1..n {
            let hi = self.h[i];
            if hi == 0.0 {
                continue;
            }
            let u = &self.reflectors[i * n..i * n + i];
            t.iter_mut().for_each(|x| *x = 0.0);
            for (k, &uk) in u.iter().enumerate() {
                axpy(&mut t, uk, &z[k * n..(k + 1) * n]);
            }
            for (k, &uk) in u.iter().enumerate() {
                axpy(&mut z[k * n..(k + 1) * n], -uk / hi, &t);
            }
        }
        z
    }

    /// Infinity norm of the tridiagonal matrix; the scale for tolerances.
    pub(crate) fn norm(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            let mut row = self.diag[i].abs();
            if i > 0 {
                row += self.sub[i - 1].abs();
            }
            if i + 1 < self.n {
                row += self.sub[i].abs();
            }
            m = m.max(row);
        }
        m
    }
}

/// Implicit-shift QL on a tridiagonal, eigenvalues only. `d` is the diagonal
/// and `e` the subdiagonal shifted up one slot (`e[i] = T[i+1][i]`, with
/// `e[n-1]` scratch). Eigenvalues are left unsorted in `d`.
pub(crate) fn ql_eigenvalues(d: &mut [f64], e: &mut [f64], tol: f64, cap: usize) -> Result<()> {
    ql_iterate(d, e, tol, cap, |_, _, _, _| {})
}

/// Implicit-shift QL with accumulation of the rotations into the row-major
/// matrix `z` (whose columns start as Q and finish as eigenvectors).
pub(crate) fn ql_with_vectors(
    d: &mut [f64],
    e: &mut [f64],
    z: &mut [f64],
    tol: f64,
    cap: usize,
) -> Result<()> {
    let n = d.len();
    ql_iterate(d, e, tol, cap, |i, c, s, _| {
        for k in 0..n {
            let row = &mut z[k * n..(k + 1) * n];
            let hk = row[i + 1];
            row[i + 1] = s * row[i] + c * hk;
            row[i] = c * row[i] - s * hk;
        }
    })
}

fn ql_iterate<F: FnMut(usize, f64, f64, usize)>(
    d: &mut [f64],
    e: &mut [f64],
    tol: f64,
    cap: usize,
    mut rotate: F,
) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let thresh = tol.max(EPS);

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let mut total_iter = 0usize;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        loop {
            let mut m = l;
            while m < n - 1 {
                if e[m].abs() <= thresh * tst1 {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            total_iter += 1;
            if total_iter > cap {
                return Err(Error::NumericalFailure {
                    message: "implicit-shift QL did not converge".into(),
                    iteration_cap: cap,
                    achieved_residual: if tst1 > 0.0 { e[l].abs() / tst1 } else { 0.0 },
                });
            }

            // Implicit shift from the 2x2 corner.
            let g = d[l];
            let mut pp = (d[l + 1] - g) / (2.0 * e[l]);
            let mut r = pp.hypot(1.0);
            if pp < 0.0 {
                r = -r;
            }
            d[l] = e[l] / (pp + r);
            d[l + 1] = e[l] * (pp + r);
            let dl1 = d[l + 1];
            let mut hh = g - d[l];
            for item in d.iter_mut().take(n).skip(l + 2) {
                *item -= hh;
            }
            f += hh;

            pp = d[m];
            let mut c = 1.0f64;
            let mut c2 = c;
            let mut c3 = c;
            let el1 = e[l + 1];
            let mut s = 0.0f64;
            let mut s2 = 0.0f64;
            for i in (l..m).rev() {
                c3 = c2;
                c2 = c;
                s2 = s;
                let gg = c * e[i];
                hh = c * pp;
                r = pp.hypot(e[i]);
                e[i + 1] = s * r;
                s = e[i] / r;
                c = pp / r;
                pp = c * d[i] - s * gg;
                d[i + 1] = hh + s * (c * gg + s * d[i]);
                rotate(i, c, s, l);
            }
            pp = -s * s2 * c3 * el1 * e[l] / dl1;
            e[l] = s * pp;
            d[l] = c * pp;

            if e[l].abs() <= thresh * tst1 {
                break;
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// One eigenvector of the tridiagonal by inverse iteration at shift `sigma`.
/// `start_tag` seeds the deterministic starting vector. Returns the vector in
/// tridiagonal coordinates (unit norm) or None if iteration stalls.
pub(crate) fn inverse_iteration(
    diag: &[f64],
    sub: &[f64],
    sigma: f64,
    scale: f64,
    start_tag: u64,
) -> Option<Vec<f64>> {
    let n = diag.len();
    if n == 1 {
        return Some(vec![1.0]);
    }
    let lu = factor_shifted(diag, sub, sigma, scale);
    let mut x = start_vector(n, start_tag);
    let resid_tol = (n as f64) * EPS * scale.max(1.0) * 16.0;

    for _ in 0..8 {
        lu.solve(&mut x);
        let norm = dot(&x, &x).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        let inv = 1.0 / norm;
        x.iter_mut().for_each(|v| *v *= inv);
        if tridiag_residual(diag, sub, sigma, &x) <= resid_tol {
            return Some(x);
        }
    }
    if tridiag_residual(diag, sub, sigma, &x) <= resid_tol * 64.0 {
        return Some(x);
    }
    None
}

pub(crate) fn tridiag_residual(diag: &[f64], sub: &[f64], sigma: f64, x: &[f64]) -> f64 {
    let n = diag.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut r = (diag[i] - sigma) * x[i];
        if i > 0 {
            r += sub[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            r += sub[i] * x[i + 1];
        }
        acc += r * r;
    }
    acc.sqrt()
}

// Deterministic quasi-random start vector in [-0.5, 0.5).
fn start_vector(n: usize, tag: u64) -> Vec<f64> {
    let mut state = crate::seeds::mix(tag ^ 0x5851_f42d_4c95_7f2d);
    (0..n)
        .map(|_| {
            state = crate::seeds::mix(state);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

// LU factorization of (T - sigma I) with partial pivoting; bandwidth (1,1)
// gives two superdiagonals after fill-in.
struct ShiftedLu {
    ud: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
    mult: Vec<f64>,
    swap: Vec<bool>,
}

fn factor_shifted(diag: &[f64], sub: &[f64], sigma: f64, scale: f64) -> ShiftedLu {
    let n = diag.len();
    let tiny = EPS * scale.max(1.0);
    let mut ud: Vec<f64> = diag.iter().map(|&d| d - sigma).collect();
    let mut s1 = vec![0.0; n.saturating_sub(1)];
    let mut s2 = vec![0.0; n.saturating_sub(2)];
    let mut mult = vec![0.0; n.saturating_sub(1)];
    let mut swap = vec![false; n.saturating_sub(1)];
    if n >= 2 {
        s1.copy_from_slice(sub);
    }

    for i in 0..n - 1 {
        let below = sub[i];
        if below.abs() > ud[i].abs() {
            swap[i] = true;
            let old = (ud[i], s1[i], if i + 2 < n { s2[i] } else { 0.0 });
            ud[i] = below;
            s1[i] = ud[i + 1];
            if i + 2 < n {
                s2[i] = sub[i + 1];
            }
            let m = old.0 / ud[i];
            mult[i] = m;
            ud[i + 1] = old.1 - m * s1[i];
            if i + 2 < n {
                s1[i + 1] = old.2 - m * s2[i];
            }
        } else {
            if ud[i] == 0.0 {
                ud[i] = tiny;
            }
            let m = below / ud[i];
            mult[i] = m;
            ud[i + 1] -= m * s1[i];
            if i + 2 < n {
                // s1[i+1] already holds sub[i+1]; fill-in s2[i] is zero here.
            }
        }
    }
    if ud[n - 1] == 0.0 {
        ud[n - 1] = tiny;
    }
    ShiftedLu {
        ud,
        s1,
        s2,
        mult,
        swap,
    }
}

impl ShiftedLu {
    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swap[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.mult[i] * b[i];
        }
        b[n - 1] /= self.ud[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.s1[n - 2] * b[n - 1]) / self.ud[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.s1[i] * b[i + 1] - self.s2[i] * b[i + 2]) / self.ud[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_matvec(n: usize, a: &[f64], x: &[f64]) -> Vec<f64> {
        (0..n).map(|i| dot(&a[i * n..(i + 1) * n], x)).collect()
    }

    // Reconstruction check: Q T Q' must reproduce A.
    #[test]
    fn tridiagonalize_preserves_matrix() {
        let n = 6;
        let mut a = vec![0.0; n * n];
        let mut state = 12345u64;
        for i in 0..n {
            for j in 0..=i {
                state = crate::seeds::mix(state);
                let v = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let tri = tridiagonalize(n, a.clone());
        let q = tri.accumulate_q();
        // Rebuild A = Q T Q^T column by column.
        for col in 0..n {
            // t = T * (Q^T e_col) where Q^T e_col is row col of Q.
            let qrow: Vec<f64> = (0..n).map(|j| q[col * n + j]).collect();
            let mut t = vec![0.0; n];
            for i in 0..n {
                let mut v = tri.diag[i] * qrow[i];
                if i > 0 {
                    v += tri.sub[i - 1] * qrow[i - 1];
                }
                if i + 1 < n {
                    v += tri.sub[i] * qrow[i + 1];
                }
                t[i] = v;
            }
            let rebuilt: Vec<f64> = (0..n)
                .map(|r| dot(&q[r * n..(r + 1) * n], &t))
                .collect();
            for r in 0..n {
                assert!(
                    (rebuilt[r] - a[r * n + col]).abs() < 1e-12,
                    "entry ({r},{col})"
                );
            }
        }
        // apply_q on basis vectors agrees with accumulate_q columns.
        for col in 0..n {
            let mut z = vec![0.0; n];
            z[col] = 1.0;
            tri.apply_q(&mut z);
            for r in 0..n {
                assert!((z[r] - q[r * n + col]).abs() < 1e-13);
            }
        }
        let _ = dense_matvec(n, &a, &vec![1.0; n]);
    }

    #[test]
    fn ql_eigenvalues_of_known_tridiagonal() {
        // T = tridiag(-1, 2, -1) of size 4: eigenvalues 2 - 2 cos(k pi / 5).
        let mut d = vec![2.0; 4];
        let mut e = vec![-1.0, -1.0, -1.0, 0.0];
        ql_eigenvalues(&mut d, &mut e, 1e-12, 200).unwrap();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (k, want) in (1..=4).map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 5.0).cos())
            .enumerate()
        {
            assert!((d[k] - want).abs() < 1e-10, "lambda_{k}");
        }
    }

    #[test]
    fn inverse_iteration_recovers_eigenvector() {
        let d = vec![2.0; 5];
        let s = vec![-1.0; 4];
        let lam = 2.0 - 2.0 * (std::f64::consts::PI / 6.0).cos();
        let x = inverse_iteration(&d, &s, lam, 4.0, 0).unwrap();
        assert!(tridiag_residual(&d, &s, lam, &x) < 1e-10);
    }
}
