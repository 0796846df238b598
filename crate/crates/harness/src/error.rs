//! Harness-level errors and their process exit codes.

use corpusgate_core::BackendError;
use thiserror::Error;

/// Anything that can go wrong while driving an experiment.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad configuration or unusable input files.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] corpusgate_core::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<BackendError> for Error {
    fn from(e: BackendError) -> Self {
        Error::Core(corpusgate_core::Error::Backend(e))
    }
}

impl Error {
    /// Process exit code: 1 for configuration problems, 2 for backend
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(corpusgate_core::Error::Backend(_)) => 2,
            _ => 1,
        }
    }

    /// Whether this error originated in a model backend.
    pub fn is_backend(&self) -> bool {
        matches!(self, Error::Core(corpusgate_core::Error::Backend(_)))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_distinguish_backend_failures() {
        let config = Error::Config("bad".into());
        assert_eq!(config.exit_code(), 1);

        let backend: Error = BackendError::Transport("refused".into()).into();
        assert_eq!(backend.exit_code(), 2);
        assert!(backend.is_backend());

        let core = Error::Core(corpusgate_core::Error::ZeroK);
        assert_eq!(core.exit_code(), 1);
        assert!(!core.is_backend());
    }
}
