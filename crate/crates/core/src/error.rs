use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    SiteOutOfRange { index: usize, n_qubits: usize },

    #[error("duplicate qubit index {0}")]
    DuplicateSite(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("matrix is not a valid density operator: {0}")]
    InvalidDensity(String),

    #[error("register of {n} qubits exceeds the configured limit of {limit}")]
    SizeLimit { n: usize, limit: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("parity bound argument s{sign} = {value:e} is negative")]
    NegativeParityArgument { sign: char, value: f64 },

    #[error("measurement direction certificate is negative ({0:e})")]
    CertificateViolation(f64),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
