use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error("malformed mesh file: {0}")]
    MeshFormat(String),
    #[error("degenerate triangle {0}")]
    DegenerateTriangle(usize),
    #[error("matrix is not positive definite (pivot {pivot}, value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("dense budget exceeded: {size} > {budget}")]
    BudgetExceeded { size: usize, budget: usize },
    #[error("operator is not positive definite: pAp = {0:e} at iteration {1}")]
    Indefinite(f64, usize),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("need {need} eigenvalues, have {have}")]
    InsufficientEigenvalues { need: usize, have: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
