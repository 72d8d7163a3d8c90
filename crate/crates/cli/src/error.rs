use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command-line tool, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    UnknownProblem(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}:{line}: {msg}", path.display())]
    Data { path: PathBuf, line: usize, msg: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnknownProblem(_) => 2,
            CliError::Config(_) => 3,
            CliError::Data { .. } => 4,
            CliError::Io { .. } | CliError::Internal(_) => 5,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn data(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        CliError::Data { path: path.into(), line, msg: msg.into() }
    }
}

impl From<omffm::Error> for CliError {
    fn from(e: omffm::Error) -> Self {
        match e {
            omffm::Error::UnknownProblem { .. } => CliError::UnknownProblem(e.to_string()),
            omffm::Error::Config(_) | omffm::Error::Parameter(_) => CliError::Config(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
