use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid algebra spec `{spec}`: {reason}")]
    InvalidSpec { spec: String, reason: String },

    #[error("invalid algebra definition: {0}")]
    InvalidDefinition(String),

    #[error("index {index} out of range for algebra of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("span is not closed under the bracket: {0}")]
    NotClosed(String),

    #[error("slice mismatch: {0}")]
    SliceMismatch(String),

    #[error("mismatched operands: {0}")]
    Mismatch(String),

    #[error("unusable prime {prime}: {reason}")]
    BadPrime { prime: u64, reason: String },

    #[error("slice (k = {k}, degree = {degree}) was not computed")]
    MissingSlice { k: usize, degree: i64 },

    #[error("report format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
