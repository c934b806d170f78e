use thiserror::Error;

/// Errors raised by the numerical engines.
///
/// Non-convergence carries the best value reached so that callers can decide
/// whether a flagged result is still usable.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: value {value}, error estimate {abs_error} after {evaluations} evaluations")]
    NonConvergence {
        value: f64,
        abs_error: f64,
        evaluations: usize,
    },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("guard violated: {0}")]
    Guard(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("kernel is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("kernel is not positive semidefinite (eigenvalue {eigenvalue:e}, largest {largest:e})")]
    NotPositive { eigenvalue: f64, largest: f64 },

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("additivity violated: {0}")]
    Additivity(String),

    #[error("gram operators differ by {0:e}")]
    GramMismatch(f64),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
