use std::io;

use thiserror::Error;

/// Errors surfaced by every layer of the crate.
///
/// The variants line up with the CLI exit codes: argument errors exit with
/// 2, capability errors with 3 and integrity errors with 4.
#[derive(Debug, Error)]
pub enum ScraError {
    /// Input outside an operation's domain.
    #[error("argument error: {0}")]
    Argument(String),
    /// Valid input the implementation refuses to handle at this size.
    #[error("capability error: {0}")]
    Capability(String),
    /// An internal invariant was found broken at runtime.
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ScraError {
    pub fn argument(msg: impl Into<String>) -> Self {
        ScraError::Argument(msg.into())
    }

    pub fn capability(msg: impl Into<String>) -> Self {
        ScraError::Capability(msg.into())
    }

    pub fn integrity(msg: impl Into<String>) -> Self {
        ScraError::Integrity(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            ScraError::Argument(_) => 2,
            ScraError::Capability(_) => 3,
            ScraError::Integrity(_) => 4,
            ScraError::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, ScraError>;
