use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("input contains a non-finite value at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },

    #[error("series too short: {0}")]
    TooShort(String),

    #[error("adjusted range requires a scalar series, got q = {0}")]
    NotScalar(usize),

    /// The CUSUM path has zero adjusted range (e.g. a constant series); the
    /// range-normalized statistic is undefined.
    #[error("degenerate adjusted range{}", match .coordinate { Some(j) => format!(" in coordinate {j}"), None => String::new() })]
    DegenerateRange { coordinate: Option<usize> },

    #[error("matrix CUSUM normalizer is numerically singular (min/max eigenvalue ratio {ratio:e})")]
    SingularNormalizer { ratio: f64 },

    #[error("matrix is not positive definite (pivot {pivot} at index {index} below threshold)")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("one-step statistic requested at horizon tau = {0}; pass HorizonCheck::Override to apply it anyway")]
    HorizonMismatch(usize),

    #[error("HAC long-run covariance is singular after PSD repair")]
    SingularHac,

    #[error("self-normalizer of the unconditional series is zero")]
    DegenerateNormalizer,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
