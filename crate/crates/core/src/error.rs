use std::path::PathBuf;

use thiserror::Error;

/// A single input record that failed validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordError {
    pub line: usize,
    pub reason: String,
}

impl std::fmt::Display for RecordError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {rejected} of {total} records rejected (limit {limit:.0}%); first: {first}")]
    TooManyRejected {
        path: PathBuf,
        rejected: usize,
        total: usize,
        limit: f64,
        first: RecordError,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("duplicate review_id {0:?}")]
    DuplicateReview(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("text contains no tokens")]
    EmptyText,

    #[error("word list {path}: {reason}")]
    WordList { path: PathBuf, reason: String },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("degenerate training data: {0}")]
    Degenerate(String),

    #[error("feature dimension mismatch: model expects {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("feature names do not match model: expected [{expected}], got [{found}]")]
    FeatureMismatch { expected: String, found: String },

    #[error("singular least-squares system")]
    Singular,

    #[error("model file is truncated: {0}")]
    ModelTruncated(String),

    #[error("unsupported model file version {found} (expected {expected})")]
    ModelVersion { found: u64, expected: u64 },

    #[error("unsupported model type {0:?}")]
    UnsupportedModel(String),

    #[error("model file schema violation: {0}")]
    ModelSchema(String),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
