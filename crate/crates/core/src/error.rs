use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is not Hermitian: entry ({row},{col}) differs from conj of ({col},{row}) by {gap:e}")]
    NotHermitian { row: usize, col: usize, gap: f64 },

    #[error("matrix is numerically singular")]
    SingularInput,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("point lies on the polar set cz + d = 0")]
    PoleHit,

    #[error("map is not affine")]
    NotAffine,

    #[error("degenerate draw: homogeneous coordinate underflowed twice")]
    DegenerateDraw,

    #[error("could not draw a well-conditioned matrix in {attempts} attempts")]
    ResampleExhausted { attempts: usize },

    #[error("cdf returned {value} outside [0, 1]")]
    InvalidCdf { value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}
