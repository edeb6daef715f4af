use std::io;

use capsketch::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("invalid statistic descriptor: {0}")]
    Descriptor(String),
    #[error("{path}: not a sketch file: {msg}")]
    Format { path: String, msg: String },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn io(path: impl Into<String>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 0 success, 2 parse error, 3 incompatible sketches, 4 unsupported
    /// statistic, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Descriptor(_) | CliError::Format { .. } => 2,
            CliError::Core(Error::Decode(_)) => 2,
            CliError::Core(Error::Incompatible(_)) => 3,
            CliError::Core(Error::UnsupportedStatistic(_)) => 4,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
