use thiserror::Error;

/// Errors raised by problem evaluation, the solvers and the metrics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point lies outside the feasible box: {point:?}")]
    OutsideBox { point: Vec<f64> },

    #[error("non-finite objective value at {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("unknown problem `{name}`; available: {}", available.join(", "))]
    UnknownProblem { name: String, available: Vec<String> },

    #[error("capability unavailable: {0}")]
    Capability(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("direction subproblem did not converge (duality gap {residual:e})")]
    Numerical { residual: f64 },

    #[error("evaluation budget exhausted")]
    BudgetExhausted,
}

pub type Result<T> = std::result::Result<T, Error>;
