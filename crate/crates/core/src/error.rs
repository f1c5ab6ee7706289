use thiserror::Error;

/// Errors produced by the covariance-matrix algebra and the protocol builders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square with even dimension, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not symmetric (max relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not symplectic (max deviation {deviation:.3e})")]
    NotSymplectic { deviation: f64 },

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("beam splitter needs two distinct modes, got {0} twice")]
    SameMode(usize),

    #[error("invalid mode partition: {0}")]
    InvalidPartition(String),

    #[error("symplectic eigenvalues could not be paired: {0}")]
    PairingFailure(String),

    #[error("characteristic polynomial has odd coefficient {value:.3e} (relative), expected an even polynomial")]
    OddCoefficient { value: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("purity check failed: alpha^2 - beta^2 - tau^2 - 1 = {residual:.3e}")]
    PurityViolation { residual: f64 },

    #[error("quadratic model for the separability statistic does not hold (relative residual {residual:.3e})")]
    QuadraticModel { residual: f64 },

    #[error("measured block is singular along the homodyne direction (variance {variance:.3e})")]
    SingularMeasurement { variance: f64 },

    #[error("negative radicand {0:.3e} in two-mode symplectic eigenvalue")]
    NegativeRadicand(f64),

    #[error("correlation matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("symplectic eigenvalue must be positive, got {0}")]
    NonPositiveEigenvalue(f64),

    #[error("invalid sweep specification: {0}")]
    InvalidSweep(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
