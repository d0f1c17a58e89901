//! Sequential rank estimation: test K0 = 1, 2, ... and return the first
//! value the test fails to reject.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;
use crate::spectra::{eigs_topk, SymMatrix, DEFAULT_TOL};
use crate::testing::{
    residual, sample_mask, statistic_diagonal, statistic_subsampled, TestOutcome, Variant,
};

/// Default cap on the candidate ranks swept by `estimate_k`.
pub const DEFAULT_K_MAX: usize = 15;

/// Result of a sequential estimation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEstimate {
    /// First non-rejected rank, absent when every candidate was rejected.
    pub k_hat: Option<usize>,
    /// Outcome for each K0 attempted, in order.
    pub trail: Vec<TestOutcome>,
    pub alpha: f64,
    pub k_max: usize,
    /// True iff all K0 <= k_max were rejected.
    pub exhausted: bool,
}

/// Estimate the rank by sequentially testing K0 = 1..k_max at level alpha,
/// stopping at the first acceptance. Each K0 uses a fresh mask whose seed is
/// derived deterministically from (seed, K0); the eigendecomposition is
/// computed once to depth k_max and reused across the sweep.
///
/// An exactly-zero residual at some K0 certifies rank <= K0 and is treated
/// as acceptance there, with the `degenerate` flag set on that outcome.
pub fn estimate_k(
    x: &SymMatrix,
    alpha: f64,
    k_max: usize,
    m: f64,
    seed: u64,
) -> Result<RankEstimate> {
    estimate_k_with_variant(x, auto_variant(x), alpha, k_max, m, seed)
}

fn auto_variant(x: &SymMatrix) -> Variant {
    if x.has_selfloops() {
        Variant::Diagonal
    } else {
        Variant::Subsampled
    }
}

/// Estimation sweep with an explicit statistic variant.
pub fn estimate_k_with_variant(
    x: &SymMatrix,
    variant: Variant,
    alpha: f64,
    k_max: usize,
    m: f64,
    seed: u64,
) -> Result<RankEstimate> {
    let n = x.n();
    if k_max < 1 || k_max >= n {
        return Err(Error::invalid(format!(
            "k_max must satisfy 1 <= k_max < n = {n}, got {k_max}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }

    let decomp = eigs_topk(x, k_max, DEFAULT_TOL)?;
    let mut trail = Vec::new();
    let mut k_hat = None;

    for k0 in 1..=k_max {
        let w = residual(x, &decomp, k0)?;
        let sub_seed = seeds::derive(seed, seeds::STREAM_SWEEP, k0 as u64);
        let stat = match variant {
            Variant::Subsampled => {
                let mask = sample_mask(n, m, sub_seed)?;
                statistic_subsampled(&w, &mask).map(|s| (s, Some(mask)))
            }
            Variant::Diagonal => statistic_diagonal(&w).map(|s| (s, None)),
            Variant::FullsumDiagnostic => {
                crate::testing::statistic_fullsum(&w).map(|s| (s, None))
            }
        };
        let outcome = match stat {
            Ok((statistic, mask)) => {
                let mut out = TestOutcome::from_statistic(variant, k0, statistic, alpha)?;
                if let Some(mask) = mask {
                    out.m = Some(m);
                    out.seed = Some(sub_seed);
                    out.n_sampled_pairs = Some(mask.len());
                    out.empty_mask = mask.is_empty();
                }
                out
            }
            Err(Error::DegenerateDenominator(_)) => {
                let mut out = TestOutcome::from_statistic(variant, k0, 0.0, alpha)?;
                out.degenerate = true;
                out
            }
            Err(e) => return Err(e),
        };
        let accept = !outcome.reject;
        trail.push(outcome);
        if accept {
            k_hat = Some(k0);
            break;
        }
    }

    Ok(RankEstimate {
        k_hat,
        exhausted: k_hat.is_none(),
        trail,
        alpha,
        k_max,
    })
}
