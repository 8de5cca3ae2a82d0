use thiserror::Error;

/// Errors produced by the toolkit. Domain and parse errors are caller
/// mistakes; the remaining variants are numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("target phases unreachable within {p_max} W; nearest achievable phases ({}, {})", nearest[0], nearest[1])]
    Unreachable { p_max: f64, nearest: [f64; 2] },

    #[error("Fisher information matrix is singular (condition number {condition:.3e})")]
    Singular { condition: f64 },

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("degenerate likelihood: {0}")]
    Degenerate(String),

    #[error("optimizer did not converge: {0}")]
    Convergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures caused by the numerics rather than by the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Unreachable { .. }
                | Error::Singular { .. }
                | Error::Degenerate(_)
                | Error::Convergence(_)
        )
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
