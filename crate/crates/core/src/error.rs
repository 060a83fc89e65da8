use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QleError {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("state vector is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    EigenNotConverged { sweeps: usize, residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("hypotheses {first:?} and {second:?} differ only by a constant shift c = {shift}")]
    DegenerateHypotheses { first: String, second: String, shift: f64 },

    #[error("degenerate evidence: posterior mass {0:e} vanished under every hypothesis")]
    DegenerateEvidence(f64),

    #[error("particle guess heuristic found no pair of distinguishable live hypotheses")]
    PghFailure,

    #[error("dense classical-quantum state of dimension {0} exceeds the oracle cap of 64")]
    OracleTooLarge(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, QleError>;
