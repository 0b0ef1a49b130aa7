use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("article {id}: {message}")]
    Validation { id: String, message: String },

    #[error("label {label}: requested {requested} articles but only {available} available")]
    InsufficientArticles {
        label: String,
        requested: usize,
        available: usize,
    },

    #[error("duplicate article id {0}")]
    DuplicateId(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("ids do not align: {0}")]
    Alignment(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("non-finite loss at step {step} (batch ids: {})", batch_ids.join(", "))]
    NonFiniteLoss { step: usize, batch_ids: Vec<String> },

    #[error("invalid model input: {0}")]
    Model(String),

    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },

    #[error("registry: {0}")]
    Registry(String),

    #[error("ensemble: {0}")]
    Ensemble(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
