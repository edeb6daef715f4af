use thiserror::Error;

/// Errors produced by the sketching library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("incompatible sketches: {0}")]
    Incompatible(String),

    #[error("unsupported statistic: {0}")]
    UnsupportedStatistic(String),

    #[error("ill-posed transform: {0}")]
    IllPosed(String),

    #[error("sum counter overflow")]
    Overflow,

    #[error("malformed sketch encoding: {0}")]
    Decode(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
