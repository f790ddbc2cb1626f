use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong between a moment source and a fitted density.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial of degree {needed} needs moments up to order {needed}, only {available} available")]
    InsufficientMoments { needed: usize, available: usize },

    #[error("moment matrix is not positive definite at order {order}: {reason}")]
    MomentMatrixNotPD { order: usize, reason: String },

    #[error("adaptive quadrature did not converge on [{lower}, {upper}] (estimate {estimate}, error {error_estimate})")]
    QuadratureFailure {
        lower: f64,
        upper: f64,
        estimate: f64,
        error_estimate: f64,
    },

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),

    #[error("linear system is singular or too ill-conditioned: {0}")]
    SingularSystem(String),

    #[error("need at least two observations")]
    EmptyData,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid moments: {0}")]
    InvalidMoments(String),

    #[error("estimate is degenerate: positive part integrates to {0}")]
    DegenerateEstimate(f64),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("non-finite value in replication {replication}, iteration {iteration}, variable `{variable}`")]
    NumericOverflow {
        replication: u64,
        iteration: u64,
        variable: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 1 for numerical failures, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MomentMatrixNotPD { .. }
            | Error::QuadratureFailure { .. }
            | Error::NonPositiveVariance(_)
            | Error::SingularSystem(_)
            | Error::DegenerateEstimate(_)
            | Error::NumericOverflow { .. } => 1,
            _ => 2,
        }
    }
}

/// Errors from the loop-program front end. Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: variable `{name}` is used before it is assigned")]
    UseBeforeAssign { line: usize, name: String },

    #[error("line {line}: unknown function `{name}`")]
    UnknownFunction { line: usize, name: String },

    #[error("line {line}: nested loops are not supported")]
    NestedLoop { line: usize },

    #[error("line {line}: branch probability {probability} outside [0, 1]")]
    BadProbability { line: usize, probability: f64 },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::UseBeforeAssign { line, .. }
            | ParseError::UnknownFunction { line, .. }
            | ParseError::NestedLoop { line }
            | ParseError::BadProbability { line, .. } => *line,
        }
    }
}
