use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The inputs are valid but lie outside the domain of the requested
    /// quantity (e.g. asking for a cluster velocity of a diverging pair).
    #[error("out of domain: {0}")]
    Domain(String),
    /// A drift specification file failed to parse or validate.
    #[error("drift specification: {0}")]
    DriftFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
