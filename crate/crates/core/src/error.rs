use thiserror::Error;

/// Errors raised by the library.
///
/// The CLI maps `Domain` to exit code 1 and `Resource` to exit code 3.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource cap exceeded: {what} (limit {limit})")]
    Resource { what: String, limit: u64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>, limit: u64) -> Self {
        Error::Resource {
            what: what.into(),
            limit,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
