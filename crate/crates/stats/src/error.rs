use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("input is empty")]
    Empty,
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("input is constant: {0}")]
    Constant(String),
    #[error("invalid count: {0}")]
    InvalidCount(String),
    #[error("table has a zero margin: {0}")]
    ZeroMargin(String),
    #[error("no variance: {0}")]
    NoVariance(String),
    #[error("singular information matrix; collinear columns: {}", .0.join(", "))]
    Collinear(Vec<String>),
}
