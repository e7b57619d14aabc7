use thiserror::Error;

/// Errors raised by the simulation engines, circuit builders and estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QkmmError {
    /// A qubit index is out of range or repeated within one gate.
    #[error("qubit index error: {0}")]
    Index(String),

    /// Shapes, register sizes or engine limits do not fit together.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Input data violates a documented precondition (normalization, unitarity, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Non-finite or out-of-range numbers appeared during evaluation.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A high-level gate could not be lowered to the elementary set.
    #[error("decomposition error: {0}")]
    Decomposition(String),

    /// The caller handed over something the operation does not accept.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Text circuit format could not be parsed.
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, QkmmError>;
