use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric: relative asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    Asymmetric { asymmetry: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid group assignment: {0}")]
    InvalidGroups(String),

    #[error("group index {index} out of range for {groups} groups")]
    GroupOutOfRange { index: usize, groups: usize },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("objective undefined: log det of non-PD matrix")]
    NotPositiveDefinite,

    #[error("input covariance is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    CovarianceNotPsd { min_eigenvalue: f64 },

    #[error("degenerate estimate: all off-diagonal entries are zero")]
    DegenerateEstimate,

    #[error("empty graph: no edges")]
    EmptyGraph,

    #[error("eigendecomposition did not converge")]
    EigenFailure,

    #[error("generator failed: {0}")]
    Generation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
