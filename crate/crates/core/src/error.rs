use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("record is missing required field `{0}`")]
    MissingField(String),

    #[error("rating {0} outside 1..=5")]
    InvalidRating(i64),

    #[error("not enough pairs to split: {available} available, {requested} requested for val+test")]
    InsufficientPairs { available: usize, requested: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("vocabulary mismatch: model expects {expected}, got {found}")]
    VocabularyMismatch { expected: String, found: String },

    #[error("feature space mismatch: ensemble expects {expected:016x}, got {found:016x}")]
    FeatureSpaceMismatch { expected: u64, found: u64 },

    #[error("bad model file: {0}")]
    BadModel(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
