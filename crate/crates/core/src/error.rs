use thiserror::Error;

/// Failure classes shared by every module.
///
/// The CLI maps these onto exit codes, so the variants are kept coarse.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("{0}")]
    Domain(String),
    /// An enumeration, alphabet or code-length cap would be exceeded.
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    /// No admissible parameter exists (e.g. no delta meets the tail budget).
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// A documented precondition on the arguments does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn resource(msg: impl Into<String>) -> Error {
    Error::Resource(msg.into())
}
