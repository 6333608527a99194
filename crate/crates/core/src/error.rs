use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{path}: expected header `{expected}`, found `{found}`")]
    BadHeader {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid song analysis: {0}")]
    InvalidAnalysis(String),

    #[error("descriptive statistics need a non-empty, finite series")]
    EmptySeries,

    #[error("unusable beat series: {0}")]
    UnusableBeats(String),

    #[error("dataset is empty after assembly")]
    EmptyDataset,

    #[error("dataset invariant violated: {0}")]
    InvalidDataset(String),

    #[error("class {class} has {count} instances, fewer than the {folds} folds requested")]
    ClassTooSmall {
        class: String,
        count: usize,
        folds: usize,
    },

    #[error("both classes must be present")]
    SingleClass,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("feature schema mismatch (missing: [{}], extra: [{}])", missing.join(", "), extra.join(", "))]
    SchemaMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },

    #[error("unknown feature `{name}`; valid names: {}", valid.join(", "))]
    UnknownFeature { name: String, valid: Vec<String> },

    #[error("need at least two distinct years, found {0}")]
    InsufficientYears(usize),

    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
