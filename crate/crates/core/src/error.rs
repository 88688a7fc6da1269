use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("element {index} is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { index: usize, min_eigenvalue: f64 },

    #[error("elements do not sum to the identity (residual norm {residual:.3e})")]
    Completeness { residual: f64 },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("POVM is not sharp")]
    NotSharp,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(what: impl Into<String>) -> Error {
    Error::DimensionMismatch(what.into())
}
