use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two inputs that must agree (grids, curves) do not.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The computation itself broke down (aliasing guard, vanishing denominator).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A truncation check on a finite window did not meet its bound.
    #[error("accuracy check failed: {0}")]
    Accuracy(String),

    #[error("invalid scenario: {constraint}: {detail}")]
    Validation {
        constraint: &'static str,
        detail: String,
    },

    #[error("cannot parse scenario {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. } | Error::Parse { .. } | Error::Domain(_)
        )
    }
}
