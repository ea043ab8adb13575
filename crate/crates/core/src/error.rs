use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input failed a precondition (shape, range, monotonicity, finiteness).
    #[error("validation error: {0}")]
    Validation(String),

    /// Estimator or experiment configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// A generation request cannot be met under the stated constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A request exceeds the size a brute-force routine accepts.
    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    /// An iterative numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
