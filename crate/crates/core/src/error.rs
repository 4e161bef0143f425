use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0}")]
    Degenerate(&'static str),

    /// Dykstra's iteration ran out of rounds. Carries the last iterate.
    #[error("projection did not converge after {rounds} rounds (iterate gap {gap:e})")]
    NoConvergence {
        rounds: usize,
        gap: f64,
        last: Vec<f64>,
    },

    #[error("objective became non-finite at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::DimensionMismatch { .. } | Error::Malformed(_)
        )
    }
}
