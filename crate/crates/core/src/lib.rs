//! Dephasing-induced leakage for few-level superconducting gate models.
//!
//! The crate computes how classical frequency noise `ε(t)·V₀` drives population
//! out of the computational subspace during gates whose ideal evolution
//! transiently visits auxiliary levels. Three independent routes are provided:
//!
//! * first-order spectral formulas built from interaction-picture transition
//!   amplitudes ([`leakage`]),
//! * Lindblad master equations with a diagonal jump operator ([`lindblad`]),
//! * stochastic Schrödinger trajectories averaged over synthesized noise
//!   ([`leakage::leakage_monte_carlo`]).
//!
//! Concrete gate models (rapid and adiabatic controlled-phase, DRAG NOT) live
//! in [`gates`]. Units throughout: time in ns, angular frequency in rad/ns,
//! white-noise amplitude in 1/ns, 1/f amplitude in 1/ns².

pub mod error;
pub mod evolution;
pub mod gates;
pub mod leakage;
pub mod lindblad;
pub mod linalg;
pub mod noise;
pub mod optim;
pub mod quad;

pub use error::{Error, Result};

/// Converts a frequency in MHz (cycles) to an angular frequency in rad/ns.
pub fn mhz_to_rad_per_ns(mhz: f64) -> f64 {
    2.0 * std::f64::consts::PI * mhz * 1e-3
}

/// Converts a frequency in GHz (cycles) to an angular frequency in rad/ns.
pub fn ghz_to_rad_per_ns(ghz: f64) -> f64 {
    2.0 * std::f64::consts::PI * ghz
}

/// Converts microseconds to nanoseconds.
pub fn us_to_ns(us: f64) -> f64 {
    us * 1e3
}

/// Guide chapters, compiled as doctests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/gates.md")]
    mod gates {}
    #[doc = include_str!("../../../book/src/leakage.md")]
    mod leakage {}
    #[doc = include_str!("../../../book/src/master-equation.md")]
    mod master_equation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
