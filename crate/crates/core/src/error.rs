//! Error taxonomy shared by every module in the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterative numerical routine failed to converge.
    #[error("numerical failure: {message} (iteration cap {iteration_cap}, achieved residual {achieved_residual:e})")]
    NumericalFailure {
        message: String,
        iteration_cap: usize,
        achieved_residual: f64,
    },

    /// The normalizing sum of a test statistic is exactly zero, so the
    /// statistic is undefined. Signals an exact low-rank fit.
    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    /// The requested statistic variant does not apply to the input
    /// (e.g. the diagonal statistic on a matrix whose diagonal was zeroed).
    #[error("invalid variant: {0}")]
    InvalidVariant(String),

    /// A text input could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A file header declares a format this crate does not read.
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
