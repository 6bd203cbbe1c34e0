use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value outside an operation's domain (singular point, bad dimension, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter failed validation before any work was done.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge: estimate {estimate:.6e}, error {error:.3e} > tolerance {tolerance:.3e}")]
    Quadrature {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("series did not converge within {terms} terms (last partial sum {partial:.6e})")]
    SeriesDivergence { terms: usize, partial: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("integration blew up at step {step} (t = {time:.6e})")]
    Blowup { step: usize, time: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
