use thiserror::Error;

/// Errors raised by the toolkit's operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (e.g. `r > 1`).
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed or inconsistent arguments.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A kernel was evaluated at its singularity.
    #[error("singular evaluation: {0}")]
    Singular(String),
    /// The quantity does not exist for the given data (e.g. sigma of a non-Dini modulus).
    #[error("undefined: {0}")]
    Undefined(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn argument<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
