use thiserror::Error;

/// Errors raised by the numerical routines and the I/O front end.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The result would overflow the floating-point range.
    #[error("range error: {0}")]
    Range(String),

    /// A quadrature or series failed to converge.
    #[error("numerical error: {message} (achieved error estimate {estimate:e})")]
    Numerical { message: String, estimate: f64 },

    /// A kernel table or ball is too small for the requested evaluation.
    #[error("radius {radius} is too small: need at least {required}")]
    RadiusTooSmall { radius: usize, required: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, estimate: f64) -> Self {
        Error::Numerical {
            message: msg.into(),
            estimate,
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical { .. } | Error::Range(_) | Error::RadiusTooSmall { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
