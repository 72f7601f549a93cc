use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Bad arguments: dimension mismatch, window too small, depth 0, ...
    #[error("usage error: {0}")]
    Usage(String),
    /// The request is well-formed but outside what can be certified.
    #[error("refused: {0}")]
    Refusal(String),
    /// Two brackets of the same exact value failed to overlap.
    #[error("internal consistency fault: {0}")]
    InternalConsistency(String),
    /// Instance too large for an exact oracle.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn refusal(msg: impl Into<String>) -> Self {
        Error::Refusal(msg.into())
    }
}
