use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid input: wrong shape, unknown variable, broken normalisation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input exceeds an enumeration guard.
    #[error("size limit exceeded: {0}")]
    Size(String),

    /// A numerical routine failed to converge or lost feasibility.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn size(msg: impl Into<String>) -> Self {
        Error::Size(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
