use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] gbs_page::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2 validation, 3 analytic series out of range, 4 numerical failure, 1 I/O.
    pub fn exit_code(&self) -> u8 {
        use gbs_page::Error as E;
        match self {
            CliError::Validation(_) | CliError::Json { .. } => 2,
            CliError::Core(E::InvalidArgument(_)) => 2,
            CliError::Core(E::TruncationCap { .. } | E::SmallSqueezing { .. }) => 3,
            CliError::Core(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
