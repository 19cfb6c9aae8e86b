use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, RunError>;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] eicl_core::Error),

    #[error(transparent)]
    Gateway(#[from] eicl_gateway::GatewayError),

    #[error("config: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl RunError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether this error comes from configuration or data checks rather
    /// than from executing a run.
    pub fn is_validation(&self) -> bool {
        matches!(self, RunError::Config(_) | RunError::Core(_))
    }
}
