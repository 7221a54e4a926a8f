use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("support is empty")]
    EmptySupport,

    #[error("rank deficient design: |R[{column}, {column}]| = {pivot:e} below tolerance {tolerance:e}")]
    RankDeficient {
        column: usize,
        pivot: f64,
        tolerance: f64,
    },

    #[error("exact fit: residual sum of squares is zero, log-likelihood is unbounded")]
    ExactFit,

    #[error("uncertainty must be nonnegative and finite, got {0}")]
    NegativeUncertainty(f64),

    #[error("matrix is not symmetric: max asymmetry {0:e}")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite: pivot {pivot:e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("cannot compare scores of different criteria ({0} vs {1})")]
    MixedCriteria(String, String),

    #[error("bootstrap mean of coefficient {column} is {mean:e}; coefficient of variation undefined")]
    UnstableCoefficient { column: usize, mean: f64 },

    #[error("fitted intercept {0:e} is too small to carry the augmentation columns")]
    ZeroIntercept(f64),

    #[error("rounded uncertainty {0} is below 1")]
    DegenerateU(u64),

    #[error("simulation diverged: |u| = {value:e} at t = {time}")]
    UnstableSimulation { value: f64, time: f64 },

    #[error("requested {requested} samples but only {available} interior grid points are usable")]
    TooFewInteriorPoints { requested: usize, available: usize },

    #[error("invalid library: {0}")]
    InvalidLibrary(String),

    #[error("invalid field data: {0}")]
    InvalidField(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
