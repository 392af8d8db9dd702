use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("logarithm outside the principal branch: {0}")]
    Branch(String),
    #[error("matrix is not in the algebra representation (projection residual {0:e})")]
    NotInAlgebra(f64),
    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),
    #[error("not a Lie algebra: {0}")]
    NotLie(String),
    #[error("invalid surface: {0}")]
    Surface(String),
    #[error("unresolved arc label `{0}`")]
    UnresolvedLabel(String),
    #[error("gluing failed: {0}")]
    Glue(String),
    #[error("Newton projection did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("constraint differential is rank deficient: rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("structural error: {0}")]
    Structural(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("exact mode required: {0}")]
    ExactRequired(String),
    #[error("singular input: {0}")]
    Singular(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
