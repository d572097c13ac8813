//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    InvalidDimension,

    #[error("cross radius must be at least 1")]
    InvalidRadius,

    #[error("coordinate {0} lies outside [-1, 1]")]
    OutOfDomain(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("oversampled budget needs m >= 2, got m = {0}")]
    BudgetUndefined(usize),

    #[error("node count must be at least 1")]
    EmptyNodeSet,

    #[error("matrix must not be empty")]
    EmptyMatrix,

    #[error("expected a {} design matrix", if *.expected_normalized { "normalized" } else { "raw (unnormalized)" })]
    NormalizationMismatch { expected_normalized: bool },

    #[error("oversampling factor b = {b} must exceed 1 + 1/m = {min}")]
    OversamplingTooSmall { b: f64, min: f64 },

    #[error("need at least ceil(b*m) = {required} vectors, got {available}")]
    TooFewVectors { available: usize, required: usize },

    #[error("input is numerically rank deficient: smallest singular value {sigma_min:.3e} below threshold {threshold:.3e}")]
    RankDeficient { sigma_min: f64, threshold: f64 },

    #[error("underdetermined system: {rows} rows < {cols} columns")]
    Underdetermined { rows: usize, cols: usize },

    #[error("row index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("basis mismatch: oracle is {oracle}, approximant is {approximant}")]
    BasisMismatch {
        oracle: &'static str,
        approximant: &'static str,
    },

    #[error("quadrature grid of {grid} points per dimension too coarse for frequency {frequency} (need at least {required})")]
    GridTooCoarse {
        grid: usize,
        frequency: i64,
        required: usize,
    },

    #[error("Monte Carlo estimate needs at least 100 points, got {0}")]
    TooFewMcPoints(usize),

    #[error("need at least {required} records in range, found {found}")]
    TooFewRecords { found: usize, required: usize },

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("linear algebra backend failed: {0}")]
    Linalg(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
