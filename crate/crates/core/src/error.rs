use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed alist: {0}")]
    Alist(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("rank deficiency cannot be repaired: {0}")]
    RankDeficient(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("label {label} out of range for {count} classes")]
    LabelOutOfRange { label: usize, count: usize },
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("stale forward cache: model changed since the forward pass")]
    StaleCache,
    #[error("model format error: {0}")]
    ModelFormat(String),
    #[error("corpus error: {0}")]
    Corpus(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
