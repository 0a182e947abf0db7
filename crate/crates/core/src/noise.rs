//! Classical dephasing noise: spectral densities, their calibration against
//! dephasing times, dephasing exponents, and Gaussian trajectory synthesis.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, C64};
use crate::quad::{integrate, integrate_breaks, QuadOptions};

/// Default lower cutoff of the 1/f spectrum.
pub const DEFAULT_F_MIN_HZ: f64 = 1.0;
/// Default upper cutoff of the 1/f spectrum.
pub const DEFAULT_F_MAX_HZ: f64 = 100e9;
/// Calibration constant folding the 1/f log factor into `T_φ⁽²⁾`.
pub const ONE_OVER_F_CALIBRATION: f64 = 2.6;

/// `ln c = 3/2 − γ − ln 2`, the constant in `D₂(t) ≈ (S₁/2π) t² ln(c/x_min)`.
pub fn ln_c() -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    1.5 - EULER_GAMMA - std::f64::consts::LN_2
}

/// Converts a cyclic frequency in Hz to rad/ns.
pub fn hz_to_rad_per_ns(f: f64) -> f64 {
    2.0 * PI * f * 1e-9
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    White,
    OneOverF,
}

/// Two-sided noise spectrum `S(ω)` with `C(τ) = (1/2π)∫S(ω)e^{iωτ}dω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub kind: SpectrumKind,
    /// `S₀` in 1/ns (white) or `S₁` in 1/ns² (1/f).
    pub amplitude: f64,
    /// Lower cutoff in Hz (1/f only).
    pub f_min: f64,
    /// Upper cutoff in Hz (1/f only).
    pub f_max: f64,
}

impl SpectralDensity {
    pub fn white(s0: f64) -> Result<Self> {
        let s = Self { kind: SpectrumKind::White, amplitude: s0, f_min: 0.0, f_max: f64::INFINITY };
        s.validate()?;
        Ok(s)
    }

    pub fn one_over_f(s1: f64) -> Result<Self> {
        Self::one_over_f_with_cutoffs(s1, DEFAULT_F_MIN_HZ, DEFAULT_F_MAX_HZ)
    }

    pub fn one_over_f_with_cutoffs(s1: f64, f_min: f64, f_max: f64) -> Result<Self> {
        let s = Self { kind: SpectrumKind::OneOverF, amplitude: s1, f_min, f_max };
        s.validate()?;
        Ok(s)
    }

    /// Zero amplitude is accepted and represents the noiseless limit.
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::param("amplitude", format!("must be finite and non-negative, got {}", self.amplitude)));
        }
        if self.kind == SpectrumKind::OneOverF && !(self.f_min > 0.0 && self.f_min < self.f_max) {
            return Err(Error::param("f_min", format!("need 0 < f_min < f_max, got {} and {}", self.f_min, self.f_max)));
        }
        Ok(())
    }

    /// Same spectrum with the amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { amplitude: self.amplitude * factor, ..*self }
    }

    /// Angular cutoffs in rad/ns (`(0, ∞)` for white noise).
    pub fn band(&self) -> (f64, f64) {
        match self.kind {
            SpectrumKind::White => (0.0, f64::INFINITY),
            SpectrumKind::OneOverF => (hz_to_rad_per_ns(self.f_min), hz_to_rad_per_ns(self.f_max)),
        }
    }

    pub fn evaluate(&self, omega: f64) -> f64 {
        match self.kind {
            SpectrumKind::White => self.amplitude,
            SpectrumKind::OneOverF => {
                let w = omega.abs();
                let (lo, hi) = self.band();
                if w >= lo && w <= hi {
                    self.amplitude / w
                } else {
                    0.0
                }
            }
        }
    }
}

/// Dephasing times `T_φ⁽¹⁾` (exponential) and `T_φ⁽²⁾` (Gaussian) in ns.
/// `f64::INFINITY` stands for "no dephasing".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingCalibration {
    pub t_phi_1: f64,
    pub t_phi_2: f64,
    /// 1 for single-qubit models, 2 when two independent qubits dephase.
    pub qubit_multiplicity: u8,
}

impl DephasingCalibration {
    pub fn new(t_phi_1: f64, t_phi_2: f64, qubit_multiplicity: u8) -> Result<Self> {
        let cal = Self { t_phi_1, t_phi_2, qubit_multiplicity };
        if !(1..=2).contains(&qubit_multiplicity) {
            return Err(Error::param("qubit_multiplicity", format!("must be 1 or 2, got {qubit_multiplicity}")));
        }
        Ok(cal)
    }

    pub fn single(t_phi_1: f64, t_phi_2: f64) -> Self {
        Self { t_phi_1, t_phi_2, qubit_multiplicity: 1 }
    }

    pub fn two_qubit(t_phi_1: f64, t_phi_2: f64) -> Self {
        Self { t_phi_1, t_phi_2, qubit_multiplicity: 2 }
    }
}

fn positive_time(name: &'static str, t: f64) -> Result<()> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("dephasing time must be positive, got {t}")))
    }
}

/// `S₀ = 2·m / T_φ⁽¹⁾`.
pub fn white_from_t1(cal: &DephasingCalibration) -> Result<SpectralDensity> {
    positive_time("t_phi_1", cal.t_phi_1)?;
    SpectralDensity::white(2.0 * f64::from(cal.qubit_multiplicity) / cal.t_phi_1)
}

/// `S₁ = (m / 2.6) / [T_φ⁽²⁾]²`, default cutoffs.
pub fn oneoverf_from_t2(cal: &DephasingCalibration) -> Result<SpectralDensity> {
    positive_time("t_phi_2", cal.t_phi_2)?;
    let m = f64::from(cal.qubit_multiplicity);
    SpectralDensity::one_over_f(m / ONE_OVER_F_CALIBRATION / (cal.t_phi_2 * cal.t_phi_2))
}

/// `∫_{x_min}^{x_max} sin²x / x³ dx`, the slowly varying factor in `D₂(t)`.
pub fn sin2_over_x3(x_min: f64, x_max: f64) -> Result<f64> {
    if !(x_min > 0.0) || x_max <= x_min {
        return Ok(0.0);
    }
    let opts = QuadOptions::rel(1e-10);
    let mut total = 0.0;
    // Low part in u = ln x, where the integrand sin²x/x² is smooth and O(1).
    let low_hi = x_max.min(PI);
    if x_min < low_hi {
        let r = integrate(
            |u: f64| {
                let x = u.exp();
                let s = x.sin() / x;
                s * s
            },
            x_min.ln(),
            low_hi.ln(),
            opts,
        )?;
        total += r.value;
    }
    if x_max > PI {
        let start = x_min.max(PI);
        let osc_end = x_max.min(1000.0 * PI);
        if osc_end > start {
            let mut breaks = vec![start];
            let mut k = (start / PI).floor() + 1.0;
            while k * PI < osc_end {
                breaks.push(k * PI);
                k += 1.0;
            }
            breaks.push(osc_end);
            let r = integrate_breaks(|x: f64| x.sin().powi(2) / (x * x * x), &breaks, opts)?;
            total += r.value;
        }
        if x_max > osc_end {
            // sin² averages to ½ out here; the oscillating remainder is O(x⁻³)
            let a = osc_end.max(start);
            total += 0.25 * (1.0 / (a * a) - 1.0 / (x_max * x_max));
        }
    }
    Ok(total)
}

/// Log factor `∫ sin²x/x³` for a 1/f spectrum at time `t`.
pub fn one_over_f_log_factor(s: &SpectralDensity, t: f64) -> Result<f64> {
    let x_min = PI * s.f_min * 1e-9 * t;
    let x_max = PI * s.f_max * 1e-9 * t;
    sin2_over_x3(x_min, x_max)
}

/// Dephasing exponent `D(t) = (1/π)∫ S(ω) [sin(ωt/2)/ω]² dω`.
pub fn dephasing_exponent(s: &SpectralDensity, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::param("t", format!("must be non-negative, got {t}")));
    }
    if t == 0.0 || s.amplitude == 0.0 {
        return Ok(0.0);
    }
    match s.kind {
        SpectrumKind::White => Ok(0.5 * s.amplitude * t),
        SpectrumKind::OneOverF => Ok(s.amplitude / (2.0 * PI) * t * t * one_over_f_log_factor(s, t)?),
    }
}

/// Leading-order approximation `(S₁/2π) t² ln(c/x_min)`.
pub fn dephasing_exponent_log_approx(s: &SpectralDensity, t: f64) -> f64 {
    let x_min = PI * s.f_min * 1e-9 * t;
    s.amplitude / (2.0 * PI) * t * t * (ln_c() - x_min.ln())
}

/// Piecewise-constant noise samples `ε(t_k)`, `t_k = k·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrajectory {
    pub dt: f64,
    pub samples: Vec<f64>,
    pub seed: u64,
}

/// SplitMix64 finaliser; derives independent per-trajectory seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Spectral synthesis of a stationary Gaussian process with spectrum `s`.
///
/// Fourier coefficients on a grid of twice the trajectory length carry random
/// phases and Rayleigh amplitudes with `E|X_k|² = S(ω_k)·M/dt`; the inverse
/// transform is truncated to `round(duration/dt)` samples.
pub fn synthesize_trajectory(s: &SpectralDensity, duration: f64, dt: f64, seed: u64) -> Result<NoiseTrajectory> {
    if !(duration > 0.0) {
        return Err(Error::param("duration", format!("must be positive, got {duration}")));
    }
    if !(dt > 0.0) || dt > duration {
        return Err(Error::param("dt", format!("need 0 < dt <= duration, got {dt}")));
    }
    let nyquist_hz = 0.5 / (dt * 1e-9);
    if s.kind == SpectrumKind::OneOverF && nyquist_hz < s.f_max {
        return Err(Error::Unresolved { dt, f_max: s.f_max });
    }
    let n = (duration / dt).round().max(1.0) as usize;
    let m = 2 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spectrum = vec![c(0.0, 0.0); m];
    let d_omega = 2.0 * PI / (m as f64 * dt);
    for k in 0..=m / 2 {
        let omega = k as f64 * d_omega;
        let density = if k == 0 && s.kind == SpectrumKind::OneOverF { 0.0 } else { s.evaluate(omega) };
        let var = density * m as f64 / dt;
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        if k == 0 || 2 * k == m {
            spectrum[k] = c(var.sqrt() * a, 0.0);
        } else {
            let x = c(a, b) * (0.5 * var).sqrt();
            spectrum[k] = x;
            spectrum[m - k] = x.conj();
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(m).process(&mut spectrum);
    let samples = spectrum[..n].iter().map(|x| x.re / m as f64).collect();
    Ok(NoiseTrajectory { dt, samples, seed })
}

/// One-sided list of `(ω_k, (dt/N)|Σ ε_n e^{-iω_k n dt}|²)` for `k = 0..=N/2`;
/// an unbiased estimate of the two-sided `S(ω_k)` for white noise.
pub fn periodogram(traj: &NoiseTrajectory) -> Vec<(f64, f64)> {
    let n = traj.samples.len();
    let mut buf: Vec<C64> = traj.samples.iter().map(|&x| c(x, 0.0)).collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let d_omega = 2.0 * PI / (n as f64 * traj.dt);
    (0..=n / 2).map(|k| (k as f64 * d_omega, traj.dt / n as f64 * buf[k].norm_sqr())).collect()
}
