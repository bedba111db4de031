use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not row-stochastic: {0}")]
    NotStochastic(String),

    #[error("channel rejected: {0}")]
    Validation(String),

    #[error("peripheral eigenvalue {eigenvalue} is defective (algebraic {algebraic}, geometric {geometric})")]
    PeripheralDefect {
        eigenvalue: String,
        algebraic: usize,
        geometric: usize,
    },

    #[error("Q(x_i x_j) leaves the span of N (residual {residual:e})")]
    QRangeMismatch { residual: f64 },

    #[error("algebra axiom `{axiom}` fails (residual {residual:e})")]
    AlgebraAxiomFailure { axiom: &'static str, residual: f64 },

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("resource guard: superoperator side {side} exceeds ceiling {ceiling}")]
    ResourceGuard { side: usize, ceiling: usize },

    #[error("numerical routine failed: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
