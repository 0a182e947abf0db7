//! Leakage probabilities from interaction-picture transition amplitudes.
//!
//! With `H_noise = ε(t)V₀` and `A_{j→k}(t) = ⟨a_k|V₁(t)|q_j⟩`, first-order
//! perturbation theory gives
//!
//! ```text
//! P = (1/d_Q) Σ_{j,k} (1/2π) ∫ S(ω) |Ã_{j→k}(ω)|² dω,   Ã(ω) = ∫₀ᵀ e^{iωt} A(t) dt
//! ```
//!
//! and, when `|Ã|²` is peaked at `ω_{j→k}`, the time-domain approximation
//! `P ≈ (1/d_Q) Σ S(ω_{j→k}) ∫₀ᵀ |A(t)|² dt`. A trajectory Monte Carlo over
//! synthesized noise provides an independent check of both.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{propagate_final_with_noise, HamiltonianSchedule, OperatorTrace};
use crate::linalg::{c, CMat, C64};
use crate::noise::{derive_seed, synthesize_trajectory, SpectralDensity, SpectrumKind};
use crate::quad::{fourier_sampled, integrate, simpson, QuadOptions};

/// Probabilities at or above this are outside first-order validity.
pub const PERTURBATIVE_LIMIT: f64 = 0.1;
/// Relative tolerance of the frequency integral.
pub const FREQUENCY_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactIntegral,
    PeakedApprox,
    MasterEquation,
    MonteCarlo,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ExactIntegral => "exact-integral",
            Method::PeakedApprox => "peaked",
            Method::MasterEquation => "master-eq",
            Method::MonteCarlo => "monte-carlo",
            Method::ClosedForm => "closed-form",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub steps: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageResult {
    pub probability: f64,
    pub method: Method,
    /// `ω_{j→k}` in rad/ns, one per amplitude trace, when applicable.
    pub peak_frequencies: Vec<f64>,
    pub grid: GridMeta,
    /// Statistical standard error (Monte Carlo) or quadrature error estimate.
    pub error_estimate: Option<f64>,
    /// Noiseless (intrinsic) leakage of the same model, when computed.
    pub intrinsic: Option<f64>,
    /// Set when the probability is large enough to void first-order theory.
    pub validity_warning: bool,
}

impl LeakageResult {
    pub fn new(probability: f64, method: Method) -> Self {
        Self {
            probability,
            method,
            peak_frequencies: Vec::new(),
            grid: GridMeta::default(),
            error_estimate: None,
            intrinsic: None,
            validity_warning: probability >= PERTURBATIVE_LIMIT,
        }
    }
}

/// `A_{j→k}(t_k)` on a uniform grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrace {
    pub source: usize,
    pub target: usize,
    pub dt: f64,
    pub values: Vec<C64>,
}

impl AmplitudeTrace {
    pub fn duration(&self) -> f64 {
        self.dt * (self.values.len().saturating_sub(1)) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| k as f64 * self.dt).collect()
    }

    /// `∫₀ᵀ |A(t)|² dt`.
    pub fn time_energy(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|a| a.norm_sqr()).collect();
        simpson(self.dt, &sq)
    }

    /// Keeps every `stride`-th sample; `stride` must divide the interval count.
    fn decimated(&self, stride: usize) -> AmplitudeTrace {
        AmplitudeTrace {
            source: self.source,
            target: self.target,
            dt: self.dt * stride as f64,
            values: self.values.iter().step_by(stride).copied().collect(),
        }
    }
}

fn diagonal_mask<const N: usize>(p: &CMat<N>) -> Result<[bool; N]> {
    let mut mask = [false; N];
    for i in 0..N {
        for j in 0..N {
            let v = p[(i, j)];
            let expect_diag = i == j && ((v - c(1.0, 0.0)).norm() < 1e-12 || v.norm() < 1e-12);
            if i == j {
                if !expect_diag {
                    return Err(Error::param("projector", "diagonal entries must be 0 or 1"));
                }
                mask[i] = v.norm() > 0.5;
            } else if v.norm() > 1e-12 {
                return Err(Error::param("projector", "must be diagonal in the model basis"));
            }
        }
    }
    Ok(mask)
}

/// One trace per `(j ∈ Q, k ∈ A)` pair, ordered by `j` then `k`.
pub fn amplitude_traces<const N: usize>(
    v1: &OperatorTrace<N>,
    projector_q: &CMat<N>,
    projector_a: &CMat<N>,
) -> Result<Vec<AmplitudeTrace>> {
    let q = diagonal_mask(projector_q)?;
    let a = diagonal_mask(projector_a)?;
    if (0..N).any(|i| q[i] == a[i]) {
        return Err(Error::param("projector", "P_Q and P_A must be complementary"));
    }
    if v1.times.len() < 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: v1.times.len() });
    }
    let dt = v1.dt();
    let mut out = Vec::new();
    for j in (0..N).filter(|&i| q[i]) {
        for k in (0..N).filter(|&i| a[i]) {
            out.push(AmplitudeTrace {
                source: j,
                target: k,
                dt,
                values: v1.matrices.iter().map(|m| m[(k, j)]).collect(),
            });
        }
    }
    Ok(out)
}

/// `Ã(ω) = ∫₀ᵀ e^{iωt} A(t) dt` (Filon rule on the piecewise-quadratic interpolant).
pub fn spectral_amplitude(trace: &AmplitudeTrace, omega: f64) -> C64 {
    fourier_sampled(0.0, trace.dt, &trace.values, omega)
}

fn spectral_power(trace: &AmplitudeTrace, omega: f64) -> f64 {
    spectral_amplitude(trace, omega).norm_sqr()
}

/// Location `|ω|` of the global maximum of `|Ã(ω)|²`.
///
/// A zero-padded FFT scans the whole resolvable band (both signs); the best
/// few local maxima are refined by golden-section search to relative
/// tolerance `1e-4` or better.
pub fn peak_frequency(trace: &AmplitudeTrace) -> Result<f64> {
    let n = trace.values.len();
    if n < 3 {
        return Err(Error::FlatSpectrum);
    }
    let duration = trace.duration();
    let m = (8 * n).next_power_of_two().max(1024);
    let mut buf = vec![c(0.0, 0.0); m];
    buf[..n].copy_from_slice(&trace.values);
    FftPlanner::<f64>::new().plan_fft_inverse(m).process(&mut buf);
    let d_omega = 2.0 * PI / (m as f64 * trace.dt);
    let power: Vec<f64> = buf.iter().map(|x| x.norm_sqr()).collect();
    let (min, max) = power.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    if max <= 1e-300 || max - min <= 1e-12 * max {
        return Err(Error::FlatSpectrum);
    }
    let omega_of = |k: usize| -> f64 {
        if k < m / 2 {
            k as f64 * d_omega
        } else {
            (k as f64 - m as f64) * d_omega
        }
    };
    // local maxima on the circular grid, best first
    let mut candidates: Vec<usize> = (0..m)
        .filter(|&k| {
            let l = power[(k + m - 1) % m];
            let r = power[(k + 1) % m];
            power[k] >= l && power[k] >= r && power[k] > 0.25 * max
        })
        .collect();
    candidates.sort_by(|&a, &b| power[b].total_cmp(&power[a]));
    candidates.truncate(4);

    let mut best = (0.0, f64::NEG_INFINITY);
    for k in candidates {
        let center = omega_of(k);
        let (mut lo, mut hi) = (center - d_omega, center + d_omega);
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - golden * (hi - lo);
        let mut x2 = lo + golden * (hi - lo);
        let mut f1 = spectral_power(trace, x1);
        let mut f2 = spectral_power(trace, x2);
        let scale = center.abs().max(2.0 * PI / duration);
        while hi - lo > 1e-7 * scale {
            if f1 > f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - golden * (hi - lo);
                f1 = spectral_power(trace, x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + golden * (hi - lo);
                f2 = spectral_power(trace, x2);
            }
        }
        let x = 0.5 * (lo + hi);
        let fx = spectral_power(trace, x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    if best.0.abs() < 1e-3 * d_omega {
        // maximum sits at ω = 0: no interior peak
        return Err(Error::FlatSpectrum);
    }
    Ok(best.0.abs())
}

/// `∫ S(ω)|Ã(ω)|² dω` over `ω_lo ≤ |ω| ≤ ω_hi`, integrated in `ln ω`.
fn band_integral(trace: &AmplitudeTrace, s: &SpectralDensity, lo: f64, hi: f64) -> Result<(f64, f64)> {
    if hi <= lo {
        return Ok((0.0, 0.0));
    }
    let r = integrate(
        |u: f64| {
            let w = u.exp();
            let both = spectral_power(trace, w) + spectral_power(trace, -w);
            s.evaluate(w) * w * both
        },
        lo.ln(),
        hi.ln(),
        QuadOptions { rel_tol: FREQUENCY_RTOL, abs_tol: 0.0, max_intervals: 4000 },
    )?;
    Ok((r.value, r.error))
}

fn largest_divisor_at_most(n: usize, cap: usize) -> usize {
    (1..=cap.max(1).min(n.max(1))).rev().find(|d| n % d == 0).unwrap_or(1)
}

/// Upper integration limit `max(10·ω_peak, 20·2π/T)`.
pub fn frequency_cap(trace: &AmplitudeTrace, peak: Option<f64>) -> f64 {
    let base = 20.0 * 2.0 * PI / trace.duration();
    peak.map_or(base, |p| base.max(10.0 * p))
}

fn check_dq(d_q: usize) -> Result<()> {
    if d_q == 0 {
        return Err(Error::param("d_q", "qubit subspace dimension must be positive"));
    }
    Ok(())
}

/// Full frequency integral of the first-order leakage.
///
/// For white noise `S` is constant and the integral reduces exactly (by
/// Parseval) to `S₀ ∫|A|²dt`. For 1/f noise the integrand is integrated
/// adaptively between the low cutoff and `min(ω_max, ω_cap)`.
pub fn leakage_exact(traces: &[AmplitudeTrace], s: &SpectralDensity, d_q: usize) -> Result<LeakageResult> {
    check_dq(d_q)?;
    s.validate()?;
    let mut total = 0.0;
    let mut error = 0.0;
    let mut peaks = Vec::new();
    let mut steps = 0;
    for tr in traces {
        steps = steps.max(tr.values.len().saturating_sub(1));
        match s.kind {
            SpectrumKind::White => total += s.amplitude * tr.time_energy(),
            SpectrumKind::OneOverF => {
                if s.amplitude == 0.0 || tr.values.iter().all(|a| a.norm() == 0.0) {
                    continue;
                }
                let peak = peak_frequency(tr).ok();
                if let Some(p) = peak {
                    peaks.push(p);
                }
                let cap = frequency_cap(tr, peak);
                let (lo, band_hi) = s.band();
                let hi = band_hi.min(cap);
                // ≥ 64 samples per period of the highest integrated frequency
                let intervals = tr.values.len() - 1;
                let target = ((2.0 * PI / hi) / 64.0 / tr.dt).floor() as usize;
                let stride = largest_divisor_at_most(intervals, target);
                let coarse = if stride > 1 { tr.decimated(stride) } else { tr.clone() };
                let (v, e) = band_integral(&coarse, s, lo, hi)?;
                total += v / (2.0 * PI);
                error += e / (2.0 * PI);
            }
        }
    }
    let mut out = LeakageResult::new(total / d_q as f64, Method::ExactIntegral);
    out.peak_frequencies = peaks;
    out.grid = GridMeta { steps, tolerance: FREQUENCY_RTOL };
    out.error_estimate = Some(error / d_q as f64);
    Ok(out)
}

/// Peaked approximation `(1/d_Q) Σ S(ω_{j→k}) ∫|A|²dt`.
///
/// Traces that vanish identically contribute nothing and need no peak.
pub fn leakage_peaked(traces: &[AmplitudeTrace], s: &SpectralDensity, d_q: usize) -> Result<LeakageResult> {
    check_dq(d_q)?;
    s.validate()?;
    let mut total = 0.0;
    let mut peaks = Vec::new();
    let mut steps = 0;
    for tr in traces {
        steps = steps.max(tr.values.len().saturating_sub(1));
        if tr.values.iter().all(|a| a.norm() == 0.0) {
            continue;
        }
        let energy = tr.time_energy();
        let density = match s.kind {
            SpectrumKind::White => s.amplitude,
            SpectrumKind::OneOverF => {
                let p = peak_frequency(tr)?;
                peaks.push(p);
                s.evaluate(p)
            }
        };
        if s.kind == SpectrumKind::White {
            if let Ok(p) = peak_frequency(tr) {
                peaks.push(p);
            }
        }
        total += density * energy;
    }
    let mut out = LeakageResult::new(total / d_q as f64, Method::PeakedApprox);
    out.peak_frequencies = peaks;
    out.grid = GridMeta { steps, tolerance: 0.0 };
    Ok(out)
}

/// `(1/d_Q) Σ_{j∈Q, k∈A} |⟨b_k|U|b_j⟩|²` in the basis `B` (identity if `None`).
pub fn subspace_leakage<const N: usize>(u: &CMat<N>, qubit_dim: usize, basis: Option<&CMat<N>>) -> f64 {
    let u = match basis {
        Some(b) => b.adjoint() * u * b,
        None => *u,
    };
    let mut sum = 0.0;
    for j in 0..qubit_dim {
        for k in qubit_dim..N {
            sum += u[(k, j)].norm_sqr();
        }
    }
    sum / qubit_dim as f64
}

#[derive(Debug, Clone)]
pub struct MonteCarloOptions<const N: usize> {
    pub n_traj: usize,
    pub seed: u64,
    /// Integrator steps; the schedule default if `None`.
    pub steps: Option<usize>,
    /// Computational basis (columns); the model basis if `None`.
    pub basis: Option<CMat<N>>,
}

impl<const N: usize> MonteCarloOptions<N> {
    pub fn new(n_traj: usize, seed: u64) -> Self {
        Self { n_traj, seed, steps: None, basis: None }
    }
}

/// Per-trajectory leakages, in trajectory order.
pub fn monte_carlo_samples<const N: usize>(
    schedule: &HamiltonianSchedule<N>,
    v0: &CMat<N>,
    s: &SpectralDensity,
    opts: &MonteCarloOptions<N>,
) -> Result<Vec<f64>> {
    let steps = opts.steps.unwrap_or_else(|| schedule.default_steps());
    let dt = schedule.duration / steps as f64;
    let qd = schedule.qubit_dim;
    (0..opts.n_traj as u64)
        .into_par_iter()
        .map(|i| {
            let traj = synthesize_trajectory(s, schedule.duration, dt, derive_seed(opts.seed, i))?;
            let u = propagate_final_with_noise(schedule, Some((v0, &traj.samples)), steps)?;
            Ok(subspace_leakage(&u, qd, opts.basis.as_ref()))
        })
        .collect()
}

/// Trajectory-averaged `(1/d_Q)Tr[P_A U P_Q U†]` with its standard error.
///
/// The reduction runs in trajectory order, so the result does not depend on
/// thread scheduling.
pub fn leakage_monte_carlo<const N: usize>(
    schedule: &HamiltonianSchedule<N>,
    v0: &CMat<N>,
    s: &SpectralDensity,
    opts: &MonteCarloOptions<N>,
) -> Result<LeakageResult> {
    if opts.n_traj < 100 {
        return Err(Error::param("n_traj", format!("need at least 100 trajectories, got {}", opts.n_traj)));
    }
    s.validate()?;
    let samples = monte_carlo_samples(schedule, v0, s, opts)?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let steps = opts.steps.unwrap_or_else(|| schedule.default_steps());
    let noiseless = propagate_final_with_noise(schedule, None, steps)?;
    let mut out = LeakageResult::new(mean, Method::MonteCarlo);
    out.error_estimate = Some((var / n).sqrt());
    out.intrinsic = Some(subspace_leakage(&noiseless, schedule.qubit_dim, opts.basis.as_ref()));
    out.grid = GridMeta { steps, tolerance: 0.0 };
    Ok(out)
}
