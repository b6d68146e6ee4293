use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or inconsistent configuration, detected before any compute.
    #[error("configuration error: {0}")]
    Config(String),

    /// An API was called in a state that does not permit it.
    #[error("usage error: {0}")]
    Usage(String),

    /// Non-finite values in a learner update.
    #[error("training error: {message}\n{dump}")]
    Training { message: String, dump: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("environment error in actor {actor}: {source}")]
    Actor {
        actor: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
