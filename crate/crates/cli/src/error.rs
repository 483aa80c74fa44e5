use std::fmt::Display;

use thiserror::Error;

/// Failure of a CLI run, grouped by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or an invalid config.
    #[error("usage: {0}")]
    Usage(String),
    /// A solver failed on a valid config.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// I/O or other unexpected failure.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn usage(e: impl Display) -> Self {
        Self::Usage(e.to_string())
    }

    pub fn numerical(e: impl Display) -> Self {
        Self::Numerical(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Numerical(_) => 3,
            Self::Internal(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Internal(e.to_string())
    }
}
