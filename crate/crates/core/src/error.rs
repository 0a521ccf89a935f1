use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("scenario too large: {count} vertices exceeds the limit of {limit}")]
    TooLarge { count: u128, limit: u128 },
    #[error("arithmetic overflow evaluating {0}")]
    Overflow(String),
    #[error("unsupported scenario: {0}")]
    Unsupported(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("optimization failed: {0}")]
    Optimization(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
