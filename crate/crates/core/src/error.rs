use thiserror::Error;

/// Errors raised by the geometry, schedule and rate layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar parameter lies outside its admissible range.
    #[error("{name} = {value} is outside {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// Points of different models or dimensions were combined.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An operator, space or schedule description is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// The product of the betas vanishes, so no integer psi bounds its reciprocal.
    #[error("no valid psi for k = {k}: beta_{index} = 0")]
    NoValidPsi { k: u64, index: u64 },

    /// Two certificates (or a certificate and its inputs) were built under incompatible assumptions.
    #[error("inconsistent composition: {0}")]
    Consistency(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_unit<T: crate::Real>(name: &'static str, value: T) -> Result<()> {
    if value >= T::zero() && value <= T::one() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: value.to_f64().unwrap_or(f64::NAN),
            expected: "[0, 1]",
        })
    }
}
