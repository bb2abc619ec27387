use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("validation: {0}")]
    Validation(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 2 config, 3 I/O, 4 validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Io { .. } => 3,
            Self::Validation(_) => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }
}

impl From<flbench::Error> for CliError {
    fn from(e: flbench::Error) -> Self {
        match e {
            flbench::Error::InvalidArgument(m) => Self::Config(m),
            flbench::Error::Io(source) => Self::Io { path: PathBuf::new(), source },
            other => Self::Validation(other.to_string()),
        }
    }
}

pub(crate) fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub(crate) fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}
