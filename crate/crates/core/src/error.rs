use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("cannot fit a TF-IDF model on zero units")]
    EmptyUnits,

    #[error("document id mismatch: expected `{expected}`, found `{found}`")]
    DocumentMismatch { expected: String, found: String },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("negative value {value} at index {index}")]
    NegativeValue { index: usize, value: f64 },

    #[error("PageRank did not converge within {iterations} iterations")]
    NotConverged { iterations: usize, last: Vec<f64> },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("k = {k} is outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("need at least 2 items, got {0}")]
    TooFewItems(usize),

    #[error("feature dimension mismatch: model expects {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("missing {what} for documents: {}", ids.join(", "))]
    Missing { what: &'static str, ids: Vec<String> },

    #[error("schema version mismatch: expected `{expected}`, found `{found}`")]
    SchemaMismatch { expected: String, found: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
