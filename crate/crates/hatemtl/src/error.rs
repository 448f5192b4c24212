use thiserror::Error;

/// Crate-wide error type. Programming-contract violations (shape mismatches,
/// out-of-range indices) panic instead; these variants cover data, I/O, and
/// configuration failures a caller can act on.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("load error: {0}")]
    Load(String),

    #[error("split error: class {class:?} in dataset {dataset:?} has {count} instances, need at least 3")]
    Split {
        dataset: String,
        class: String,
        count: usize,
    },

    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated payload in model file")]
    TruncatedModel,

    #[error("model file shape mismatch: {0}")]
    ModelShape(String),

    #[error("alpha undefined: no item carries two or more votes")]
    UndefinedAlpha,

    #[error("correlation undefined: {0} has zero variance")]
    ZeroVariance(String),

    #[error("singular design matrix: {0}")]
    SingularMatrix(String),

    #[error("series too short: {have} points cannot support lag {lag}")]
    SeriesTooShort { have: usize, lag: usize },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
