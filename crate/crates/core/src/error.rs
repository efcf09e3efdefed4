use crate::dataset::SampleId;

/// Error type shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum PalError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid probability mass function: {0}")]
    InvalidPmf(String),

    #[error("image shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("labeled pool is empty")]
    EmptyLabeledPool,

    #[error("query needs {needed} unlabeled samples but only {available} remain")]
    InsufficientUnlabeled { needed: usize, available: usize },

    #[error("sample {0:?} is not in the unlabeled pool")]
    NotUnlabeled(SampleId),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("csv error at row {row}: {message}")]
    CsvRow { row: usize, message: String },

    #[error("run failed: {0}")]
    Run(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PalError>;
