use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An atom pair has no closed-form inner product; route it to quadrature.
    #[error("atom pair has no closed-form inner product: {0}")]
    NonExactPair(String),

    #[error("quadrature exceeded its subdivision budget of {panels} panels (error estimate {estimate:e})")]
    MaxSubdivision { panels: usize, estimate: f64 },

    #[error("support box is unbounded along {0}")]
    UnboundedSupport(&'static str),

    #[error("action leaves the atom algebra: {0}")]
    UnsupportedAction(String),

    #[error("case mismatch: {0}")]
    CaseMismatch(String),

    #[error("point outside chart domain: {0}")]
    DomainError(String),

    #[error("index out of range: {0}")]
    RangeError(String),

    #[error("invalid case: {0}")]
    InvalidCase(String),

    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("tail bound {bound:e} exceeds tolerance {tol:e}")]
    TailBoundExceedsTol { bound: f64, tol: f64 },

    #[error("support hypothesis violated: {0}")]
    SupportViolation(String),

    #[error("norm has non-negligible imaginary part {0:e}")]
    ComplexNorm(f64),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
