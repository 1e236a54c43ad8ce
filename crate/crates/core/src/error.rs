use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// An invalid ensemble, sweep or histogram configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// The input matrix is not Hermitian (or not unitary) within tolerance.
    #[error("matrix check failed: {0}")]
    Matrix(String),
    /// An iterative routine ran out of iterations.
    #[error("no convergence: {0}")]
    Convergence(String),
    /// Not enough data to compute the requested quantity.
    #[error("insufficient data: {0}")]
    Insufficient(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Whether the failure is numerical (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence(_) | Error::Matrix(_))
    }
}

pub type Result<T> = core::result::Result<T, Error>;
