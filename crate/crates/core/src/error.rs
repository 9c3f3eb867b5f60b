use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HetsisError>;

#[derive(Debug, Error)]
pub enum HetsisError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("R0(t) never reaches 1: {0}")]
    NoCrossing(String),

    #[error("insufficient data: {got} usable points, need at least {need}")]
    InsufficientData { got: usize, need: usize },

    #[error("internal numerical error: {0}")]
    Internal(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("output directory {0} is locked by another run")]
    Locked(PathBuf),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HetsisError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        HetsisError::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HetsisError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI: 2 for bad input or config, 3 for
    /// numerical failures, 1 for I/O and everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HetsisError::InvalidArgument(_) | HetsisError::Config(_) => 2,
            HetsisError::DegenerateInput(_)
            | HetsisError::NoCrossing(_)
            | HetsisError::InsufficientData { .. }
            | HetsisError::Internal(_) => 3,
            HetsisError::Locked(_) | HetsisError::Io { .. } => 1,
        }
    }
}
