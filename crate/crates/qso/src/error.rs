//! Error types shared by the whole crate.

use thiserror::Error;

/// Which half of the population a coefficient table, distribution or
/// index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sex {
    Female,
    Male,
}

impl std::fmt::Display for Sex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sex::Female => write!(f, "female"),
            Sex::Male => write!(f, "male"),
        }
    }
}

/// Everything that can go wrong while building models, evaluating the
/// operator or running simulations.
#[derive(Debug, Error)]
pub enum QsoError {
    #[error("negative {sex} coefficient at parent pair ({i},{j}), offspring {offspring}: {value}")]
    NegativeCoefficient {
        sex: Sex,
        i: usize,
        j: usize,
        offspring: usize,
        value: f64,
    },

    #[error("{sex} coefficient row for parent pair ({i},{j}) sums to {sum}, expected 1")]
    RowSumViolation {
        sex: Sex,
        i: usize,
        j: usize,
        sum: f64,
    },

    #[error("tensor shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("negative {sex} probability at index {index}: {value}")]
    NegativeEntry { sex: Sex, index: usize, value: f64 },

    #[error("{sex} distribution sums to {sum}, expected 1")]
    SumViolation { sex: Sex, sum: f64 },

    #[error("{sex} tangent component sums to {sum}, expected 0")]
    TangentSumViolation { sex: Sex, sum: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("dimension mismatch: model is {model_n}x{model_nu}, state is {state_n}x{state_nu}")]
    DimensionMismatch {
        model_n: usize,
        model_nu: usize,
        state_n: usize,
        state_nu: usize,
    },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("column sums differ: min {min}, max {max}")]
    UnequalColumnSums { min: f64, max: f64 },

    #[error("matrix has {found} column(s), need at least 2")]
    TooFewColumns { found: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("unknown builtin model `{0}`")]
    UnknownBuiltin(String),

    /// Iteration produced a state whose coordinate sum drifted away from 1.
    #[error("{sex} sum drifted to {sum} at step {step}")]
    SumDrift { step: usize, sex: Sex, sum: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QsoError>;
