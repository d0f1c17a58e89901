//! Rank inference for symmetric low-rank-plus-noise matrices via residual
//! subsampling, with generators and a Monte Carlo harness for size/power
//! studies.
//!
//! The test for `H0: rank(E X) = K0` extracts the top-K0 spiked spectral
//! components of the observed matrix, subsamples the off-diagonal entries of
//! the residual with a symmetric Bernoulli(1/m) mask, and normalizes the
//! subsampled sum; under the null the statistic is asymptotically standard
//! normal. Matrices with data-bearing diagonals admit a simpler statistic
//! built from the residual diagonal alone. Estimating the rank is sequential
//! testing: the first K0 the test fails to reject.

pub mod error;
pub mod seeds;

pub mod models;
pub mod normal;
pub mod spectra;
pub mod testing;

pub use error::{Error, Result};
pub use normal::{normal_cdf, normal_quantile};
pub use spectra::{canonical_sign, eigs_topk, SpectralDecomposition, SymMatrix, DEFAULT_TOL};
pub use testing::{
    default_m, residual, sample_mask, statistic_diagonal, statistic_fullsum,
    statistic_subsampled, test_rank, test_rank_with_variant, validate_m, MWarning, MaskWindow,
    SubsampleMask, TestOutcome, Variant,
};
