use thiserror::Error;

/// Errors raised by graph construction, solvers and surgery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("invalid vertex condition: {0}")]
    Condition(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("window exhausted: found {found} of {requested} eigenvalues below {upper}")]
    WindowExhausted { found: usize, requested: usize, upper: f64 },
    #[error("not an eigenvalue: smallest singular value {residual:.3e} exceeds tolerance")]
    NotEigenvalue { residual: f64 },
    #[error("eigenvalue is not simple (gap {gap:.3e})")]
    NotSimple { gap: f64 },
    #[error("hypothesis violated: edges shrunk to zero carry a nontrivial boundary mode")]
    HypothesisViolated,
    #[error("precondition not met: {0}")]
    Precondition(String),
    #[error("generator could not satisfy preconditions after {0} attempts")]
    Rejection(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
