use thiserror::Error;

/// Errors produced by the calibration, reliability, and diagnostic routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("class index {index} out of range for {classes} classes")]
    IndexOutOfRange { index: usize, classes: usize },

    #[error("point lies on the simplex boundary (entry {0} is zero); clip before log-ratio transforms")]
    BoundaryPoint(usize),

    #[error("calibrated probability underflowed to zero; check the interior clip epsilon")]
    NumericalUnderflow,

    #[error("symmetric part of A has minimum eigenvalue {min_eig} <= delta {delta}")]
    NotPositiveDefinite { min_eig: f64, delta: f64 },

    #[error("labels contain a single class; cannot fit {0}")]
    DegenerateLabels(&'static str),

    #[error("no threshold keeps the automated error rate at or below {alpha}")]
    NoFeasibleThreshold { alpha: f64 },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("AUC undefined: correctness vector contains a single class")]
    UndefinedAuc,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
