use thiserror::Error;

/// Errors surfaced by the kernels and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("trace {0:e} exceeds the trace-zero tolerance")]
    NonZeroTrace(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("determinant {0} of the acting matrix is not 1")]
    NotUnimodular(f64),
    #[error("base dimension must be at least 3, got {0}")]
    DimensionTooSmall(usize),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("grid with m={m} nodes per axis is too coarse; the basis needs m > {min}")]
    GridTooCoarse { m: usize, min: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("decay schedule evaluates on an empty mode list")]
    EmptySchedule,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("iterative eigensolver did not converge within {0} iterations")]
    ConvergenceFailure(usize),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
