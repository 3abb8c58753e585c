use thiserror::Error;

/// Errors raised by grid calculus, geometry and the variational checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GvError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("axis {0} out of range (expected 0, 1 or 2)")]
    AxisOutOfRange(usize),
    #[error("form degree {found} not allowed here: {reason}")]
    Degree { found: u8, reason: &'static str },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("metric is not positive definite at grid index {index} (x = {position:?}): {detail}")]
    SingularMetric {
        index: usize,
        position: [f64; 3],
        detail: String,
    },
    #[error("constraint `{constraint}` violated (max residual {residual:e}, tolerance {tolerance:e})")]
    Constraint {
        constraint: &'static str,
        residual: f64,
        tolerance: f64,
    },
    #[error("{0} requires a fully periodic grid")]
    NotPeriodic(&'static str),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, GvError>;
