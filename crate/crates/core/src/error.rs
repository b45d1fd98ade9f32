use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Bloch vector has norm {0}, which exceeds 1")]
    Unphysical(f64),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("measurement axis has norm {0}, expected 1")]
    NonUnitAxis(f64),
    #[error("angle {0} lies outside [0, pi/2]")]
    AngleOutOfRange(f64),
    #[error("invalid hidden-state ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("invalid braid letter `{0}`")]
    BadLetter(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
