use thiserror::Error;

/// Errors raised by the fragmentation toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A resource cap (particle count, search space) was exceeded.
    #[error("resource cap exceeded: {message}")]
    Resource {
        message: String,
        /// Number of vertices (or nodes) materialized before aborting.
        reached: usize,
    },
    /// A constrained problem has no feasible point.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// Arithmetic that would combine +inf and -inf.
    #[error("undefined extended arithmetic: {0}")]
    Undefined(String),
    /// Malformed external input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
