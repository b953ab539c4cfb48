use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("diagonal scaling entries must be positive")]
    NonPositiveScaling,

    #[error("psi outside the admissible parameter set: {0}")]
    PsiOutOfRange(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("stability number unknown and graph has {0} vertices (brute force capped at 20)")]
    GraphTooLarge(usize),

    #[error("target degree {target} below polynomial degree {degree}")]
    DegreeTooLow { target: u32, degree: u32 },

    #[error("polynomial variable count mismatch: {0} vs {1}")]
    VariableMismatch(usize, usize),

    #[error("unsupported cone/level: {0}")]
    UnsupportedCone(String),

    #[error("level exceeds configured cap: {0}")]
    LevelCap(String),

    #[error("certificate does not match the cone formulation: {0}")]
    CertificateShape(String),

    #[error("vector is not a zero of the quadratic form (residual {0:e})")]
    NotAZero(f64),

    #[error("matrix is not copositive: x^T M x = {value:e} at x = {witness:?}")]
    NonCopositive { witness: Vec<f64>, value: f64 },

    #[error("matrix too large for support enumeration: n = {0} (cap 12)")]
    TooManySupports(usize),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
