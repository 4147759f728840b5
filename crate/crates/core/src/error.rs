use thiserror::Error;

/// Errors shared by every solver and functional in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {context} (residual {residual:.3e})")]
    NumericalFailure { context: String, residual: f64 },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("fields belong to different domains")]
    DomainMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn numerical(context: impl Into<String>, residual: f64) -> Self {
        Error::NumericalFailure {
            context: context.into(),
            residual,
        }
    }
}
