use thiserror::Error;

/// Errors raised by the operator, the problem builders and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QamaError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} out of range (limit {limit})")]
    Index { index: usize, limit: usize },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("problem has {n} variables, above the solver cap of {cap}")]
    Capacity { n: usize, cap: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("no single-flip path of length <= {max_len} reaches the target state")]
    Unreachable { max_len: usize },
}

impl QamaError {
    /// Stable machine-readable tag for the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            QamaError::Shape(_) => "shape",
            QamaError::Index { .. } => "index",
            QamaError::Validation(_) => "validation",
            QamaError::Capacity { .. } => "capacity",
            QamaError::Argument(_) => "argument",
            QamaError::Unreachable { .. } => "unreachable",
        }
    }
}

pub type Result<T> = std::result::Result<T, QamaError>;
