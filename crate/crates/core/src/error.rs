use thiserror::Error;

/// Best surviving candidate of an extraction whose retry budget ran out.
#[derive(Debug, Clone)]
pub struct FailedExtraction {
    pub candidate: Vec<f64>,
    pub kept_set: Vec<usize>,
    pub measured: f64,
    pub target: f64,
    pub retries: u32,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state budget exceeded: {needed} states requested, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: usize },

    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state space is disconnected: eigenvalue 0 has multiplicity > 1")]
    Disconnected,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),

    #[error("basis construction failed: {0}")]
    BasisConstruction(String),

    #[error(
        "extraction failed after {} retries: measured error {} > target {}",
        .0.retries, .0.measured, .0.target
    )]
    ExtractionFailed(Box<FailedExtraction>),
}

pub type Result<T> = std::result::Result<T, Error>;
