use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] sparsetrial_core::Error),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 config, 3 data, 4 non-convergence.
    pub fn exit_code(&self) -> i32 {
        use sparsetrial_core::Error as C;
        match self {
            Error::Config(_) => 2,
            Error::Core(C::InvalidArgument(_)) => 2,
            Error::NonConvergence(_) => 4,
            Error::Data(_) | Error::Io { .. } | Error::Core(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
