use thiserror::Error;

/// Errors raised by state construction, validation and the criteria.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("layout error: {0}")]
    Layout(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: max |M - M^dagger| = {0:.1e}")]
    NotHermitian(f64),

    #[error("trace deviates by {0:.1e}")]
    Trace(f64),

    #[error("not positive semidefinite: minimal eigenvalue {0:.3e}")]
    NotPsd(f64),

    #[error("not supported on the symmetric subspace: deviation {0:.1e}")]
    NotSymmetricSupported(f64),

    #[error("not a permutation: {0:?}")]
    NotPermutation(Vec<usize>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("A-marginals disagree (trace distance {0:.3e})")]
    MarginalMismatch(f64),

    #[error("resource guard: {what} = {size} exceeds limit {limit}")]
    ResourceLimit {
        what: &'static str,
        size: usize,
        limit: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
