//! Harness-level error type.
//!
//! Only genuine failures are errors: malformed configuration, unwritable
//! artifacts, or numerics rejecting a request. A metric missing its target
//! is *not* an error — it is recorded in the report and surfaces as exit
//! code 1 at the CLI, while errors exit with code 2.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The configuration file, parameters, or CLI arguments are invalid.
    #[error("config error: {0}")]
    Config(String),
    /// An artifact or report could not be written.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// The numerics crate rejected the request (bad drift file, invalid
    /// simulation grid, out-of-domain formula arguments, …).
    #[error(transparent)]
    Core(#[from] oflab_core::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

/// Free-function shorthand for [`Error::Config`].
pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub type Result<T> = std::result::Result<T, Error>;
