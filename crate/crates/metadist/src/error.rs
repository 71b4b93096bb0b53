use thiserror::Error;

/// Errors produced by the moment-reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("order {n} exceeds the configured maximum {max}")]
    OrderTooLarge { n: usize, max: usize },

    #[error("dimension mismatch: matrix order {matrix_order} vs {moments_len} moments")]
    DimensionMismatch {
        matrix_order: usize,
        moments_len: usize,
    },

    #[error("invalid moment sequence at index {index}: {reason}")]
    InvalidMoments { index: usize, reason: String },

    /// A mixture weight fell below the negativity tolerance. This signals
    /// either an insufficient digit budget or an invalid moment sequence;
    /// the offending value is reported, never clipped.
    #[error(
        "precision failure: weight h[{index}] = {value} is below -{tolerance} \
         at {digits} digits; suggested budget: {suggested_digits} digits"
    )]
    PrecisionFailure {
        index: usize,
        value: String,
        tolerance: String,
        digits: u32,
        suggested_digits: u32,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("hypergeometric series did not converge within {terms} terms at {digits} digits")]
    Convergence { terms: usize, digits: u32 },

    #[error("degenerate moment sequence: point mass at {nu}")]
    Degenerate { nu: f64 },

    #[error("need at least {needed} moments, got {got}")]
    TooFewMoments { needed: usize, got: usize },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
