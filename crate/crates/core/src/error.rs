use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Distribution or configuration parameters violate their invariants.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("underflow: {0}")]
    Underflow(String),

    /// Bracketed root search failed.
    #[error("no root: {0}")]
    NoRoot(String),

    /// A numerical contract could not be honoured (cancellation, non-convergence).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no admissible points: {0}")]
    NoAdmissiblePoints(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Malformed measurement or parameter input.
    #[error("ingestion error at line {line}: {msg}")]
    Ingest { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
