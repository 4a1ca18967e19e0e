use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// The CLI maps these onto process exit codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("enumeration budget exceeded: {what} needs more than {budget} candidates")]
    BudgetExceeded { what: String, budget: u64 },

    #[error("root finder did not converge (relative residual {residual:e})")]
    RootFinding { residual: f64 },

    #[error("quadrature resolution failure: {0}")]
    Quadrature(String),

    #[error("rejection envelope violated: density {density} exceeds envelope {envelope}")]
    Envelope { density: f64, envelope: f64 },

    #[error("prime {0} is missing from at least one family member")]
    MissingPrime(u64),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Short machine-readable tag used in JSON diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::RootFinding { .. } => "root_finding",
            Error::Quadrature(_) => "quadrature",
            Error::Envelope { .. } => "envelope",
            Error::MissingPrime(_) => "missing_prime",
            Error::Parse { .. } => "parse",
            Error::CheckFailed(_) => "check_failed",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    /// 1 for validation problems, 2 for failed checks, 3 for resource exhaustion.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded { .. } => 3,
            Error::CheckFailed(_)
            | Error::RootFinding { .. }
            | Error::Quadrature(_)
            | Error::Envelope { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
