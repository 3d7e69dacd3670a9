//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the library. The CLI maps `Usage` to exit code 2 and
/// everything else to exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument values (bad ranges, malformed input).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A mathematical precondition is violated (e.g. alpha outside the
    /// regime a formula covers, degenerate site separation).
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured resource limit was exceeded (dense cap, enumeration
    /// budget).
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Numerical linear algebra failed to converge or overflowed.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed JSON configuration or model specification.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
