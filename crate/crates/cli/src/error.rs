use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Numeric(#[from] invsurr_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("{0} is missing; run `invsurr {1}` first")]
    MissingInput(PathBuf, &'static str),
    #[error("model {model} was trained on a different dataset ({recorded} != {actual})")]
    HashMismatch {
        model: String,
        recorded: String,
        actual: String,
    },
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(invsurr_core::Error::InvalidConfig(_)) => 2,
            CliError::Numeric(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
