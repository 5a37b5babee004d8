use thiserror::Error;

/// Errors raised by the library.
///
/// Variants are grouped by the kind of failure rather than by module so the
/// command-line front end can map them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition or invariant.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Malformed instance, plan or table content.
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    /// Operation refused because the input exceeds a hard limit.
    #[error("{0}")]
    Limit(String),

    /// No usable result (e.g. every instance unsolved).
    #[error("{0}")]
    Unsolved(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
