use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("channel output is not classical: {0}")]
    NotClassical(String),

    #[error("dimension cap {cap} exceeded (needed {needed})")]
    DimensionCap { cap: usize, needed: usize },

    #[error("group axiom violated: {0}")]
    GroupAxiom(String),

    #[error("invalid key distribution: {0}")]
    KeyDist(String),

    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown audit case: {0}")]
    UnknownCase(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn mismatch(msg: impl Into<String>) -> Error {
    Error::DimensionMismatch(msg.into())
}
