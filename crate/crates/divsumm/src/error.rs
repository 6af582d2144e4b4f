//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by corpus loading, scoring and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    /// A record in an input stream could not be parsed.
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    /// The same post id appeared twice where ids must be unique.
    #[error("duplicate post id `{0}`")]
    DuplicateId(String),

    /// An expected post id was absent from the input.
    #[error("missing entry for post id `{0}`")]
    MissingId(String),

    /// A post id does not exist in the corpus it was resolved against.
    #[error("unknown post id `{0}`")]
    UnknownId(String),

    /// An embedding row had the wrong number of components.
    #[error("token `{token}`: expected {expected} dimensions, found {found}")]
    DimensionMismatch {
        token: String,
        expected: usize,
        found: usize,
    },

    /// A precondition on arguments or data was violated.
    #[error("{0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn malformed(line: usize, msg: impl Into<String>) -> Self {
        Error::Malformed {
            line,
            message: msg.into(),
        }
    }
}
