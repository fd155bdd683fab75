use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("Kraus set is not trace preserving (residual {residual:.3e})")]
    NotTP { residual: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("complex expectation value (imaginary part {0:.3e})")]
    ComplexExpectation(f64),

    #[error("invalid process: probability {0:.6} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("cannot normalize counts: {0}")]
    NormalizationImpossible(String),

    #[error("recovery problem is infeasible: {0}")]
    Infeasible(String),

    #[error("solver did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("isometry constant {0} is outside [0, sqrt(2) - 1)")]
    BoundInapplicable(f64),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
