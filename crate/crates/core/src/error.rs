use thiserror::Error;

/// Errors produced by model construction, fitting and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("kernel width sigma must be positive, got {0}")]
    NonPositiveSigma(f64),

    #[error("empty sample set: {0}")]
    EmptySamples(&'static str),

    #[error("invalid parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid fold count k={k} for n={n} (need 2 <= k <= n)")]
    InvalidFolds { k: usize, n: usize },

    #[error("empty hyperparameter grid")]
    EmptyGrid,

    #[error("all grid cells failed during cross-validation")]
    AllCellsFailed,

    #[error("numerical failure: {message} (condition estimate {condition:.3e})")]
    Numerical { message: String, condition: f64 },

    #[error("covariate outside the unit cube: component {index} = {value}")]
    OutsideUnitCube { index: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
