use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad input: caught before any computation starts.
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("no simple graph after {attempts} attempts")]
    AttemptsExhausted { attempts: usize },

    #[error("chain is absorbed (no active points left)")]
    Absorbed,

    #[error("numerical failure: {what} (residual {residual:e})")]
    Numerical { what: String, residual: f64 },

    #[error("no root in (0, 1)")]
    NoRoot,

    #[error("exhaustive enumeration refused: {points} points exceeds cap of {cap}")]
    OracleCap { points: usize, cap: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Whether this error stems from bad input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::OracleCap { .. } | Error::Parse { .. }
        )
    }
}
