use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("dataset `{name}`: {source}")]
    Dataset {
        name: String,
        #[source]
        source: multiconf_core::Error,
    },

    #[error("missing dataset file {0}")]
    MissingFile(PathBuf),

    #[error("{context}: {source}")]
    Cell {
        context: String,
        #[source]
        source: multiconf_core::Error,
    },

    #[error("run directory: {0}")]
    RunDir(String),

    #[error(transparent)]
    Core(#[from] multiconf_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
