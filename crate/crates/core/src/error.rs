use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The interferometer configuration does not match its scheme.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A numerical procedure did not reach its accuracy target.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// A Fourier truncation leaves a tail above the allowed magnitude.
    #[error("truncation error: order {order} leaves tail {tail:e}")]
    Truncation { order: usize, tail: f64 },

    #[error("degenerate particle: {0}")]
    DegenerateParticle(String),

    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    #[error("resonance pole: {0}")]
    ResonancePole(String),

    /// A fit whose residual landscape carries no information about the parameters.
    #[error("non-identifiable fit: {0}")]
    NonIdentifiable(String),
}

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

pub(crate) fn require_non_negative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be non-negative and finite, got {value}"
        )))
    }
}
