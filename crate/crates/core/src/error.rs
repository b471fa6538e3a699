use thiserror::Error;

/// Errors raised by the structure-learning toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("column {0} has zero variance")]
    ZeroVarianceColumn(usize),

    #[error("covariance submatrix is not positive definite at variable {variable} (residual variance {residual:e})")]
    NotPositiveDefinite { variable: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("graph contains a directed cycle")]
    CyclicInput,

    #[error("line {line}: unknown node `{label}`")]
    UnknownNode { line: usize, label: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0} variables exceed the exact-search limit of 20")]
    TooManyVariables(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by malformed input files or specifications.
    pub fn is_parse(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::UnknownNode { .. }
                | Error::CyclicInput
                | Error::DimensionMismatch { .. }
                | Error::InvalidInput(_)
                | Error::Io(_)
        )
    }

    /// True for numerical failures (degenerate data).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroVarianceColumn(_) | Error::NotPositiveDefinite { .. }
        )
    }
}
