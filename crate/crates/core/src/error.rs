use thiserror::Error;

/// Errors surfaced by the physics and fitting routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Inputs are individually valid but mutually inconsistent.
    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),

    /// A perturbative formula was asked to operate outside its regime.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    /// An iterative fit did not converge; the message carries best-so-far.
    #[error("fit did not converge after {iterations} iterations (cost {cost:.3e})")]
    NonConvergence { iterations: usize, cost: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} is not finite")))
    }
}
