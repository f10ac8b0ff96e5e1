use thiserror::Error;

/// Errors raised across the laboratory.
///
/// Variants fall into two families: input validation (bad shapes, bad
/// parameters, malformed files) and numerical failure (solver did not
/// converge, an operator left its admissible set). The CLI maps the first
/// family to exit code 1 and the second to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not {property}: deviation {deviation:e} exceeds {tolerance:e}")]
    Structure {
        property: &'static str,
        deviation: f64,
        tolerance: f64,
    },

    #[error("eigen-solver did not converge (residual {residual:e})")]
    EigenNonConvergence { residual: f64 },

    #[error("spectrum touches the singular point (distance {distance:e})")]
    SingularPoint { distance: f64 },

    #[error("function undefined at eigenvalue {value}")]
    Domain { value: f64 },

    #[error("not positive semidefinite: eigenvalue {eigenvalue:e}")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("empty hit set")]
    EmptyHitSet,

    #[error("not enough rounds: need at least 2, have {0}")]
    NotEnoughRounds(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {message}")]
    Parse { context: String, message: String },
}

impl Error {
    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::DimensionMismatch { .. }
                | Error::Partition(_)
                | Error::EmptyHitSet
                | Error::NotEnoughRounds(_)
                | Error::Io { .. }
                | Error::Parse { .. }
                | Error::Structure { .. }
        )
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
