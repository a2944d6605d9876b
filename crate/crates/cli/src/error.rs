use std::path::{Path, PathBuf};

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const TIMEOUT: u8 = 3;
    pub const EMPTY_ENSEMBLE: u8 = 4;
    pub const INTERNAL: u8 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },
    #[error("seed {seed}: no convergence within {months} months")]
    Timeout { seed: u64, months: i64 },
    #[error("every seed was excluded from the ensemble")]
    EmptyEnsemble,
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn input(path: &Path, message: impl ToString) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Input { .. } => exit::INPUT,
            CliError::Timeout { .. } => exit::TIMEOUT,
            CliError::EmptyEnsemble => exit::EMPTY_ENSEMBLE,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }
}
