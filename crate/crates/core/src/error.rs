use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("unitarity drift {drift:e} exceeds tolerance; increase the step count")]
    UnitarityDrift { drift: f64 },

    #[error("density matrix lost positivity (min eigenvalue {min_eigenvalue:e}); increase the step count")]
    Positivity { min_eigenvalue: f64 },

    #[error("sampling step {dt} ns cannot resolve the spectrum up to {f_max:e} Hz")]
    Unresolved { dt: f64, f_max: f64 },

    #[error("no distinguishable spectral peak")]
    FlatSpectrum,

    #[error("trajectory angle left (0, pi) at t = {t} ns (theta = {theta})")]
    TrajectoryOutOfRange { t: f64, theta: f64 },

    #[error("optimizer failed after restarts: best objective {best:e}")]
    Optimizer { best: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
