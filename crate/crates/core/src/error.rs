use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid half-integer `{0}`")]
    HalfInteger(String),

    #[error("point outside the open unit disk (|xi| = {0})")]
    OutsideDisk(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("state norm {norm} outside 1 +/- {tol}")]
    Normalization { norm: f64, tol: f64 },

    #[error("truncation leak {leak:e} exceeds {limit:e} at cutoff {cutoff}")]
    TruncationLeak { leak: f64, limit: f64, cutoff: usize },

    #[error("group element determinant {0} is not 1")]
    Determinant(f64),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
