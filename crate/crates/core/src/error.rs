use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(&'static str),
    /// The inputs are valid physics but no closed form is provided for them.
    #[error("unsupported configuration: {0}")]
    Unsupported(&'static str),
    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },
    #[error("invalid run configuration: {0}")]
    Config(&'static str),
    #[error("fit failed: {reason} (after {iterations} iterations, gradient norm {gradient_norm:e})")]
    Fit {
        reason: &'static str,
        iterations: usize,
        gradient_norm: f64,
    },
}
