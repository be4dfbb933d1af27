use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state is not normalized (|a|^2 + |b|^2 = {0})")]
    NotNormalized(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace {0} is not 1")]
    BadTrace(f64),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid shift {0}: crystal shifts must be positive")]
    InvalidShift(f64),
    #[error("unsupported dimension {0}: pointer simulation needs d = 2")]
    UnsupportedDimension(usize),
    #[error("field has {0} branches, moments need a single projected branch")]
    MultiBranch(usize),
    #[error("insufficient grid resolution: {0}")]
    Resolution(String),
    #[error("projectors are not complementary: |<a|b0>| = {found}, expected {expected}")]
    NotComplementary { found: f64, expected: f64 },
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("frame mismatch: {0}")]
    FrameMismatch(String),
    #[error("reference image is not Gaussian: {0}")]
    NonGaussian(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
