//! Concrete gate models: rapid and adiabatic controlled-phase, DRAG NOT.
//!
//! Each model bundles its Hamiltonian schedule, the diagonal noise operator
//! `V₀` and the computational basis in which `Q`/`A` are defined. Closed-form
//! leakage formulas sit next to the numerical pipelines they are checked
//! against.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{
    evolve_state_final, interaction_frame_operator, propagate, propagate_final, HamiltonianSchedule,
};
use crate::leakage::{
    amplitude_traces, leakage_exact, leakage_monte_carlo, peak_frequency, subspace_leakage, AmplitudeTrace,
    GridMeta, LeakageResult, Method, MonteCarloOptions,
};
use crate::linalg::{c, real_diag, CMat, CVec, C64, I};
use crate::lindblad::{solve_final, DensityMatrix, LindbladModel};
use crate::noise::{oneoverf_from_t2, white_from_t1, DephasingCalibration, SpectralDensity, ONE_OVER_F_CALIBRATION};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::quad::{integrate_breaks, simpson, QuadOptions};

/// Dephasing model for the closed-form formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "noise", rename_all = "lowercase")]
pub enum NoiseSpec {
    /// Exponential dephasing time `T_φ⁽¹⁾` in ns.
    White { t_phi_1: f64 },
    /// Gaussian dephasing time `T_φ⁽²⁾` in ns.
    OneOverF { t_phi_2: f64 },
}

impl NoiseSpec {
    /// Spectral density for `multiplicity` independently dephasing qubits.
    pub fn spectrum(&self, multiplicity: u8) -> Result<SpectralDensity> {
        match *self {
            NoiseSpec::White { t_phi_1 } => {
                white_from_t1(&DephasingCalibration::new(t_phi_1, f64::INFINITY, multiplicity)?)
            }
            NoiseSpec::OneOverF { t_phi_2 } => {
                oneoverf_from_t2(&DephasingCalibration::new(f64::INFINITY, t_phi_2, multiplicity)?)
            }
        }
    }
}

/// Exact frequency integral or peaked approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Exact,
    Peaked,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {v}")))
    }
}

/// A gate model ready for the leakage pipelines.
#[derive(Debug, Clone)]
pub struct GateModel<const N: usize> {
    pub schedule: HamiltonianSchedule<N>,
    /// Diagonal `V₀` (also the Lindblad operator).
    pub noise_operator: CMat<N>,
    /// Columns are the computational basis; `Q` is the first `qubit_dim`.
    pub basis: CMat<N>,
}

impl<const N: usize> GateModel<N> {
    pub fn qubit_dim(&self) -> usize {
        self.schedule.qubit_dim
    }

    pub fn noise_diagonal(&self) -> [f64; N] {
        std::array::from_fn(|k| self.noise_operator[(k, k)].re)
    }

    /// Numerically simulated `A_{j→k}(t)` in the model basis.
    pub fn amplitude_traces(&self, steps: usize) -> Result<Vec<AmplitudeTrace>> {
        let trace = propagate(&self.schedule, steps)?;
        let v1 = interaction_frame_operator(&trace, &self.noise_operator)?.in_basis(&self.basis);
        amplitude_traces(&v1, &trace.projector_q(), &trace.projector_a())
    }

    /// Noiseless leakage `(1/d_Q) Tr[P_A U₀(T) P_Q U₀(T)†]`.
    pub fn intrinsic_leakage(&self, steps: usize) -> Result<f64> {
        let u = propagate_final(&self.schedule, steps)?;
        Ok(subspace_leakage(&u, self.qubit_dim(), Some(&self.basis)))
    }

    /// Trajectory Monte Carlo in the model basis.
    pub fn monte_carlo(&self, s: &SpectralDensity, n_traj: usize, seed: u64, steps: usize) -> Result<LeakageResult> {
        let opts = MonteCarloOptions { n_traj, seed, steps: Some(steps), basis: Some(self.basis) };
        leakage_monte_carlo(&self.schedule, &self.noise_operator, s, &opts)
    }

    /// Mean auxiliary population at `T` under the master equation, averaged
    /// over the computational basis states.
    pub fn master_equation_leakage(&self, rate: f64, steps: usize) -> Result<f64> {
        let model = LindbladModel::new(self.schedule.clone(), self.noise_diagonal(), rate)?;
        let qd = self.qubit_dim();
        let mut total = 0.0;
        for j in 0..qd {
            let psi: CVec<N> = self.basis.column(j).into_owned();
            let rho = solve_final(&model, &DensityMatrix::pure(&psi)?, steps)?;
            for k in qd..N {
                let aux: CVec<N> = self.basis.column(k).into_owned();
                total += rho.expectation(&aux);
            }
        }
        Ok(total / qd as f64)
    }
}

fn finish(mut r: LeakageResult, steps: usize) -> LeakageResult {
    r.grid.steps = steps;
    r
}

// ---------------------------------------------------------------------------
// Rapid controlled-phase

/// `Δ = 0` for `T = π/g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RapidCZSpec {
    /// Coupling `g` in rad/ns.
    pub g: f64,
}

impl RapidCZSpec {
    pub fn new(g: f64) -> Result<Self> {
        positive("g", g)?;
        Ok(Self { g })
    }

    pub fn gate_time(&self) -> f64 {
        PI / self.g
    }

    pub fn schedule(&self) -> Result<HamiltonianSchedule<2>> {
        let g = self.g;
        let h = CMat::<2>::new(c(0.0, 0.0), c(g, 0.0), c(g, 0.0), c(0.0, 0.0));
        HamiltonianSchedule::new(self.gate_time(), 1, move |_| h)
    }

    pub fn model(&self) -> Result<GateModel<2>> {
        Ok(GateModel { schedule: self.schedule()?, noise_operator: cz_noise_operator(), basis: CMat::identity() })
    }

    /// `A(t) = −(i/2) sin(2gt)` sampled on `steps` intervals.
    pub fn analytic_trace(&self, steps: usize) -> AmplitudeTrace {
        let dt = self.gate_time() / steps as f64;
        AmplitudeTrace {
            source: 0,
            target: 1,
            dt,
            values: (0..=steps).map(|k| c(0.0, -0.5 * (2.0 * self.g * k as f64 * dt).sin())).collect(),
        }
    }

    /// `Ã(ω) = 2g/(ω² − 4g²) e^{iωT/2} sin(ωT/2)`, continuous at `ω = ±2g`.
    pub fn spectral_amplitude_closed_form(&self, omega: f64) -> C64 {
        let g = self.g;
        let t = self.gate_time();
        let denom = omega * omega - 4.0 * g * g;
        let phase = (I * omega * t / 2.0).exp();
        if denom.abs() < 1e-9 * g * g {
            // d/dω[sin(ωT/2)] / d/dω[ω² − 4g²] at ω = ±2g, T = π/g
            let cos = (omega * t / 2.0).cos();
            return phase * (2.0 * g * (t / 2.0) * cos / (2.0 * omega));
        }
        phase * (2.0 * g / denom * (omega * t / 2.0).sin())
    }
}

/// `V₀ = diag(0, 1)` on `{|11⟩, |20⟩}`.
pub fn cz_noise_operator() -> CMat<2> {
    real_diag([0.0, 1.0])
}

/// `sin²(πx/2)/(x² − 4)²` with its limit at `x = ±2`; `|Ã(gx)|²·g²/4`.
fn rapid_power_dimensionless(x: f64) -> f64 {
    let d = x * x - 4.0;
    if d.abs() < 1e-6 {
        let u = x.abs() - 2.0;
        // sin(πx/2) ≈ ∓(π/2)(|x|−2), x²−4 ≈ 4(|x|−2)
        let s = PI / 2.0 * (1.0 - PI * PI * u * u / 24.0);
        let den = 4.0 + u;
        return (s / den).powi(2);
    }
    ((PI * x / 2.0).sin() / d).powi(2)
}

/// Peak position `ω₀/g` of `|Ã(ω)|²` for the rapid gate, from the closed form.
pub fn rapid_cz_peak_ratio() -> f64 {
    let (mut lo, mut hi) = (1.0, 2.0);
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    while hi - lo > 1e-12 {
        let x1 = hi - golden * (hi - lo);
        let x2 = lo + golden * (hi - lo);
        if rapid_power_dimensionless(x1) > rapid_power_dimensionless(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    0.5 * (lo + hi)
}

/// Constant `c` in `P = c (T/T_φ⁽²⁾)²` for the rapid gate under two-qubit
/// 1/f noise, evaluated from the closed-form `|Ã(ω)|²`.
pub fn rapid_cz_oneoverf_constant(variant: Variant) -> Result<f64> {
    let s1_scale = 2.0 / ONE_OVER_F_CALIBRATION;
    match variant {
        Variant::Peaked => Ok(s1_scale / (8.0 * PI * rapid_cz_peak_ratio())),
        Variant::Exact => {
            // P = S₁/(2π g²) ∫ 4 sin²(πx/2)/(|x|(x²−4)²) dx, g = π/T
            let x_end: f64 = 400.0;
            let breaks: Vec<f64> = (0..=200).map(|k| 2.0 * k as f64).collect();
            let r = integrate_breaks(
                |x: f64| if x == 0.0 { 0.0 } else { 4.0 * rapid_power_dimensionless(x) / x },
                &breaks,
                QuadOptions::rel(1e-10),
            )?;
            // sin² → ½ beyond x_end
            let tail = 2.0 / (4.0 * x_end.powi(4));
            let integral = 2.0 * (r.value + tail);
            Ok(s1_scale * integral / (2.0 * PI.powi(3)))
        }
    }
}

/// `P = T/(2T_φ⁽¹⁾)` (white) or `c (T/T_φ⁽²⁾)²` (1/f), `T = π/g`.
pub fn rapid_cz_closed_form(spec: &RapidCZSpec, noise: NoiseSpec, variant: Variant) -> Result<LeakageResult> {
    let t = spec.gate_time();
    let p = match noise {
        NoiseSpec::White { t_phi_1 } => {
            positive("t_phi_1", t_phi_1)?;
            t / (2.0 * t_phi_1)
        }
        NoiseSpec::OneOverF { t_phi_2 } => {
            positive("t_phi_2", t_phi_2)?;
            rapid_cz_oneoverf_constant(variant)? * (t / t_phi_2).powi(2)
        }
    };
    let mut r = LeakageResult::new(p, Method::ClosedForm);
    if let (NoiseSpec::OneOverF { .. }, Variant::Peaked) = (noise, variant) {
        r.peak_frequencies = vec![rapid_cz_peak_ratio() * spec.g];
    }
    Ok(r)
}

/// Always-on limit `4π/(Δ T_φ⁽¹⁾)` for `Δ ≫ g`.
pub fn always_on_limit(delta: f64, t_phi_1: f64) -> Result<LeakageResult> {
    positive("delta", delta.abs().max(f64::MIN_POSITIVE))?;
    positive("t_phi_1", t_phi_1)?;
    Ok(LeakageResult::new(4.0 * PI / (delta.abs() * t_phi_1), Method::ClosedForm))
}

// ---------------------------------------------------------------------------
// Adiabatic controlled-phase

/// `θ(t) = θ₀ + θ₁[1 − cos(2πt/T)] + θ₂[1 − cos(4πt/T)]`, `Δ(t) = 2g/tan θ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticCZSpec {
    pub g: f64,
    /// `Δ(0)` in rad/ns.
    pub delta0: f64,
    /// Gate time `T` in ns.
    pub duration: f64,
    pub theta1: f64,
    pub theta2: f64,
}

/// Instantaneous eigensystem of `[[0, g], [g, Δ]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CzEigensystem {
    pub theta: f64,
    pub e_minus: f64,
    pub e_plus: f64,
    pub psi_minus: CVec<2>,
    pub psi_plus: CVec<2>,
}

pub fn cz_eigensystem(g: f64, delta: f64) -> CzEigensystem {
    let theta = (2.0 * g).atan2(delta);
    let root = (delta * delta + 4.0 * g * g).sqrt();
    let (s, co) = (0.5 * theta).sin_cos();
    CzEigensystem {
        theta,
        e_minus: 0.5 * delta - 0.5 * root,
        e_plus: 0.5 * delta + 0.5 * root,
        psi_minus: CVec::<2>::new(c(co, 0.0), c(-s, 0.0)),
        psi_plus: CVec::<2>::new(c(s, 0.0), c(co, 0.0)),
    }
}

impl AdiabaticCZSpec {
    pub fn new(g: f64, delta0: f64, duration: f64, theta1: f64, theta2: f64) -> Result<Self> {
        positive("g", g)?;
        positive("delta0", delta0)?;
        positive("duration", duration)?;
        Ok(Self { g, delta0, duration, theta1, theta2 })
    }

    /// `tan θ₀ = 2g/Δ(0)`.
    pub fn theta0(&self) -> f64 {
        (2.0 * self.g).atan2(self.delta0)
    }

    pub fn theta(&self, t: f64) -> f64 {
        let x = 2.0 * PI * t / self.duration;
        self.theta0() + self.theta1 * (1.0 - x.cos()) + self.theta2 * (1.0 - (2.0 * x).cos())
    }

    pub fn detuning(&self, t: f64) -> f64 {
        2.0 * self.g / self.theta(t).tan()
    }

    /// Fails if `θ(t)` leaves `(0, π)` anywhere on the gate.
    pub fn check_trajectory(&self) -> Result<()> {
        for k in 0..=4096 {
            let t = self.duration * k as f64 / 4096.0;
            let th = self.theta(t);
            if !(th > 0.0 && th < PI) {
                return Err(Error::TrajectoryOutOfRange { t, theta: th });
            }
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<HamiltonianSchedule<2>> {
        self.check_trajectory()?;
        let spec = *self;
        HamiltonianSchedule::new(self.duration, 1, move |t| {
            let d = spec.detuning(t);
            CMat::<2>::new(c(0.0, 0.0), c(spec.g, 0.0), c(spec.g, 0.0), c(d, 0.0))
        })
    }

    /// Columns `|ψ₋(0)⟩, |ψ₊(0)⟩`: `Q = {|ψ₋(0)⟩}`, `A = {|ψ₊(0)⟩}`.
    pub fn dressed_basis(&self) -> CMat<2> {
        let e = cz_eigensystem(self.g, self.delta0);
        CMat::<2>::from_columns(&[e.psi_minus, e.psi_plus])
    }

    pub fn model(&self) -> Result<GateModel<2>> {
        Ok(GateModel { schedule: self.schedule()?, noise_operator: cz_noise_operator(), basis: self.dressed_basis() })
    }

    /// `⟨ψ₋(0)|U₀(T)|ψ₋(0)⟩`.
    pub fn phase_overlap(&self, steps: Option<usize>) -> Result<C64> {
        let schedule = self.schedule()?;
        let steps = steps.unwrap_or_else(|| schedule.default_steps());
        let psi0 = cz_eigensystem(self.g, self.delta0).psi_minus;
        let psi_t = evolve_state_final(&schedule, &psi0, steps)?;
        Ok(psi0.dotc(&psi_t))
    }

    /// `|⟨ψ₋(0)|U₀(T)|ψ₋(0)⟩ + 1|`.
    pub fn residual(&self, steps: Option<usize>) -> Result<f64> {
        Ok((self.phase_overlap(steps)? + 1.0).norm())
    }

    /// `∫₀ᵀ sin²θ(t) dt`.
    pub fn sin2_theta_integral(&self, steps: usize) -> f64 {
        let dt = self.duration / steps as f64;
        let v: Vec<f64> = (0..=steps).map(|k| self.theta(k as f64 * dt).sin().powi(2)).collect();
        simpson(dt, &v)
    }

    /// Adiabatic-approximation amplitude `A(t) = −½ e^{iφ(t)} sin θ(t)`,
    /// `φ = ∫(E₊ − E₋)dt = ∫ 2g/sin θ dt`.
    pub fn adiabatic_trace(&self, steps: usize) -> AmplitudeTrace {
        let dt = self.duration / steps as f64;
        let gap = |t: f64| 2.0 * self.g / self.theta(t).sin();
        let mut phi = 0.0;
        let mut values = Vec::with_capacity(steps + 1);
        for k in 0..=steps {
            let t = k as f64 * dt;
            if k > 0 {
                // Simpson on [t − dt, t]
                phi += dt / 6.0 * (gap(t - dt) + 4.0 * gap(t - 0.5 * dt) + gap(t));
            }
            values.push((I * phi).exp() * (-0.5 * self.theta(t).sin()));
        }
        AmplitudeTrace { source: 0, target: 1, dt, values }
    }
}

pub fn adiabatic_schedule(spec: &AdiabaticCZSpec) -> Result<HamiltonianSchedule<2>> {
    spec.schedule()
}

/// Optimised adiabatic trajectory with its achieved residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticOptimum {
    pub spec: AdiabaticCZSpec,
    pub residual: f64,
    pub evaluations: usize,
}

pub const ADIABATIC_RESIDUAL_TOL: f64 = 1e-6;
const THETA1_BOUNDS: (f64, f64) = (0.0, PI / 2.0);
const THETA2_BOUNDS: (f64, f64) = (-PI / 4.0, PI / 4.0);

/// Adiabatic phase `−φ₋(T) = g ∫ tan(θ/2) dt` for given coefficients.
fn adiabatic_phase(g: f64, delta0: f64, duration: f64, theta1: f64, theta2: f64) -> f64 {
    let spec = AdiabaticCZSpec { g, delta0, duration, theta1, theta2 };
    let n = 2000;
    let dt = duration / n as f64;
    let v: Vec<f64> = (0..=n).map(|k| (0.5 * spec.theta(k as f64 * dt)).tan()).collect();
    g * simpson(dt, &v)
}

/// Finds `θ₁, θ₂` with `⟨ψ₋(0)|U₀(T)|ψ₋(0)⟩ = −1`.
///
/// Nelder–Mead starts from the `θ₂ = 0` trajectory whose adiabatic phase is
/// exactly π; up to three seeded random restarts follow if that start does not
/// get close. The best point is then polished with damped Newton steps on
/// the complex condition.
pub fn optimize_adiabatic(g: f64, delta0: f64, duration: f64) -> Result<AdiabaticOptimum> {
    optimize_adiabatic_from(g, delta0, duration, None)
}

/// As [`optimize_adiabatic`] with an optional warm start `(θ₁, θ₂)`, e.g.
/// the optimum at a neighbouring gate time.
pub fn optimize_adiabatic_from(
    g: f64,
    delta0: f64,
    duration: f64,
    warm: Option<[f64; 2]>,
) -> Result<AdiabaticOptimum> {
    positive("g", g)?;
    positive("delta0", delta0)?;
    positive("duration", duration)?;
    if duration < PI / g {
        return Err(Error::param("duration", format!("T = {duration} ns is below π/g = {} ns", PI / g)));
    }
    let base = AdiabaticCZSpec::new(g, delta0, duration, 0.0, 0.0)?;
    let steps = base.schedule()?.default_steps();
    let at = |x: &[f64]| AdiabaticCZSpec { theta1: x[0], theta2: x[1], ..base };
    let overlap = |x: &[f64]| -> Option<C64> { at(x).phase_overlap(Some(steps)).ok() };
    let objective = |x: &[f64]| -> f64 {
        match overlap(x) {
            Some(z) => (z + 1.0).norm(),
            None => 10.0,
        }
    };

    let start = match warm {
        Some(w) => w,
        None => {
            // θ₁ from the adiabatic phase condition alone (bisection, θ₂ = 0)
            let theta0 = base.theta0();
            let (mut lo, mut hi) = (0.0, (PI - theta0) / 2.0 - 1e-6);
            if adiabatic_phase(g, delta0, duration, 0.0, 0.0) >= PI {
                hi = lo;
            }
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if adiabatic_phase(g, delta0, duration, mid, 0.0) < PI {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            [0.5 * (lo + hi), 0.0]
        }
    };

    // Newton converges from anywhere in this basin
    const HANDOFF: f64 = 1e-3;
    let mut opts = NelderMeadOptions::new(vec![0.05, 0.02]).with_bounds(vec![THETA1_BOUNDS, THETA2_BOUNDS]);
    opts.max_evaluations = 600;
    opts.target = Some(HANDOFF);
    let mut best = nelder_mead(objective, &start, &opts);
    let mut evaluations = best.evaluations;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ duration.to_bits());
    for _ in 0..3 {
        if best.value <= HANDOFF {
            break;
        }
        let x0 = [rng.random_range(THETA1_BOUNDS.0..THETA1_BOUNDS.1), rng.random_range(THETA2_BOUNDS.0..THETA2_BOUNDS.1)];
        let m = nelder_mead(objective, &x0, &opts);
        evaluations += m.evaluations;
        if m.value < best.value {
            best = m;
        }
    }

    // Gauss–Newton on (arg(−z), Re c, Im c) with c = ⟨ψ₊(0)|U₀(T)|ψ₋(0)⟩.
    // Re(z + 1) ≈ |c|²/2 is one-signed, so Newton on z + 1 itself only
    // converges linearly.
    let psi = cz_eigensystem(g, delta0);
    let residuals = |x: &[f64]| -> Option<([f64; 3], f64)> {
        let spec = at(x);
        let out = evolve_state_final(&spec.schedule().ok()?, &psi.psi_minus, steps).ok()?;
        let z = psi.psi_minus.dotc(&out);
        let cc = psi.psi_plus.dotc(&out);
        Some(([(-z).arg(), cc.re, cc.im], (z + 1.0).norm()))
    };
    let mut x = [best.x[0], best.x[1]];
    let mut r = best.value;
    if let Some((mut f, _)) = residuals(&x) {
        for _ in 0..20 {
            if r < 1e-12 {
                break;
            }
            let h = 1e-7;
            let (Some((fx, _)), Some((fy, _))) = (residuals(&[x[0] + h, x[1]]), residuals(&[x[0], x[1] + h])) else {
                break;
            };
            evaluations += 2;
            let jx: Vec<f64> = (0..3).map(|k| (fx[k] - f[k]) / h).collect();
            let jy: Vec<f64> = (0..3).map(|k| (fy[k] - f[k]) / h).collect();
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
            let (a11, a12, a22) = (dot(&jx, &jx), dot(&jx, &jy), dot(&jy, &jy));
            let (b1, b2) = (dot(&jx, &f), dot(&jy, &f));
            let det = a11 * a22 - a12 * a12;
            if !(det.abs() > 1e-30 * a11 * a22) {
                break;
            }
            let dx = (a22 * b1 - a12 * b2) / det;
            let dy = (a11 * b2 - a12 * b1) / det;
            let norm = |v: &[f64; 3]| dot(v, v).sqrt();
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..8 {
                let trial = [x[0] - scale * dx, x[1] - scale * dy];
                evaluations += 1;
                if let Some((ft, rt)) = residuals(&trial) {
                    if norm(&ft) < norm(&f) {
                        x = trial;
                        f = ft;
                        r = rt;
                        accepted = true;
                        break;
                    }
                }
                scale *= 0.5;
            }
            if !accepted {
                break;
            }
        }
    }

    if r > ADIABATIC_RESIDUAL_TOL {
        return Err(Error::Optimizer { best: r });
    }
    Ok(AdiabaticOptimum { spec: at(&x), residual: r, evaluations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdiabaticMethod {
    /// Adiabatic amplitude with the peaked approximation.
    Analytic,
    /// Simulated amplitudes and the full frequency integral.
    Numeric,
}

/// Leakage of an adiabatic controlled-phase gate under two-qubit noise `s`.
pub fn adiabatic_leakage(spec: &AdiabaticCZSpec, s: &SpectralDensity, method: AdiabaticMethod) -> Result<LeakageResult> {
    let model = spec.model()?;
    let steps = model.schedule.default_steps();
    match method {
        AdiabaticMethod::Analytic => {
            let trace = spec.adiabatic_trace(steps);
            let omega_t = peak_frequency(&trace)?;
            let p = 0.25 * s.evaluate(omega_t) * spec.sin2_theta_integral(steps);
            let mut r = LeakageResult::new(p, Method::PeakedApprox);
            r.peak_frequencies = vec![omega_t];
            Ok(finish(r, steps))
        }
        AdiabaticMethod::Numeric => {
            let traces = model.amplitude_traces(steps)?;
            Ok(finish(leakage_exact(&traces, s, 1)?, steps))
        }
    }
}

// ---------------------------------------------------------------------------
// NOT gate

/// Four-level transmon driven by `[Ω_x cos ωt + Ω_y sin ωt] X`,
/// `Ω_x = Ω₁[1 − cos(2πt/T)]`, `Ω_y = Ω₂ sin(2πt/T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NotGateSpec {
    pub omega01: f64,
    pub eta: f64,
    pub duration: f64,
    pub drive_frequency: f64,
    pub omega1: f64,
    pub omega2: f64,
}

/// Lab-frame level energies `(0, ω₀₁, 2ω₀₁ − η, 3ω₀₁ − 3η)` of a weakly
/// anharmonic ladder, `E_n = nω₀₁ − n(n−1)η/2`.
pub fn transmon_levels(omega01: f64, eta: f64) -> [f64; 4] {
    [0.0, omega01, 2.0 * omega01 - eta, 3.0 * omega01 - 3.0 * eta]
}

/// Ladder coupling `X` with matrix elements `1, √2, √3`.
pub fn transmon_x() -> CMat<4> {
    let mut x = CMat::<4>::zeros();
    for (k, v) in [1.0, SQRT_2, 3f64.sqrt()].iter().enumerate() {
        x[(k, k + 1)] = c(*v, 0.0);
        x[(k + 1, k)] = c(*v, 0.0);
    }
    x
}

/// `V₀ = L = diag(0, 1, 2, 3)`.
pub fn transmon_noise_operator() -> CMat<4> {
    real_diag([0.0, 1.0, 2.0, 3.0])
}

/// Minimum integrator steps per drive period for unitary propagation.
pub const STEPS_PER_DRIVE_PERIOD: usize = 40;
/// Steps per drive period for the master equation, which lacks the
/// unitary projection that keeps the propagator accurate.
pub const ME_STEPS_PER_DRIVE_PERIOD: usize = 100;

impl NotGateSpec {
    pub fn validate(&self) -> Result<()> {
        positive("omega01", self.omega01)?;
        positive("eta", self.eta)?;
        positive("duration", self.duration)?;
        positive("drive_frequency", self.drive_frequency)?;
        Ok(())
    }

    pub fn envelope(&self, t: f64) -> (f64, f64) {
        let x = 2.0 * PI * t / self.duration;
        (self.omega1 * (1.0 - x.cos()), self.omega2 * x.sin())
    }

    fn drive(&self, t: f64) -> f64 {
        let (ox, oy) = self.envelope(t);
        let (s, co) = (self.drive_frequency * t).sin_cos();
        ox * co + oy * s
    }

    /// `H₀ + H_drive` in the laboratory frame.
    pub fn lab_schedule(&self) -> Result<HamiltonianSchedule<4>> {
        self.validate()?;
        let spec = *self;
        let h0 = real_diag(transmon_levels(self.omega01, self.eta));
        let x = transmon_x();
        HamiltonianSchedule::new(self.duration, 2, move |t| h0 + x * c(spec.drive(t), 0.0))
    }

    /// The same dynamics in the interaction picture of the static `H₀`:
    /// `H_I(t) = e^{iH₀t} H_drive(t) e^{−iH₀t}`. No rotating-wave
    /// approximation; populations and `V₁ = U†V₀U` agree with the lab frame
    /// because `H₀` and `V₀` are both diagonal.
    pub fn interaction_schedule(&self) -> Result<HamiltonianSchedule<4>> {
        self.validate()?;
        let spec = *self;
        let levels = transmon_levels(self.omega01, self.eta);
        let x = transmon_x();
        let gaps = [levels[1] - levels[0], levels[2] - levels[1], levels[3] - levels[2]];
        HamiltonianSchedule::new(self.duration, 2, move |t| {
            let f = spec.drive(t);
            let mut h = CMat::<4>::zeros();
            for k in 0..3 {
                let (s, co) = (gaps[k] * t).sin_cos();
                let v = c(co, s) * (f * x[(k, k + 1)].re);
                // (k, k+1) picks up e^{i(E_k − E_{k+1})t}
                h[(k, k + 1)] = v.conj();
                h[(k + 1, k)] = v;
            }
            h
        })
    }

    /// Steps resolving the carrier with at least [`STEPS_PER_DRIVE_PERIOD`]
    /// points per period, rounded up to a multiple of 100.
    pub fn default_steps(&self) -> usize {
        self.steps_at(STEPS_PER_DRIVE_PERIOD)
    }

    /// Step count used by the master-equation route.
    pub fn master_equation_steps(&self) -> usize {
        self.steps_at(ME_STEPS_PER_DRIVE_PERIOD)
    }

    fn steps_at(&self, per_period: usize) -> usize {
        let periods = self.drive_frequency * self.duration / (2.0 * PI);
        let n = ((periods * per_period as f64).ceil() as usize).max(1000);
        n.div_ceil(100) * 100
    }

    pub fn model(&self) -> Result<GateModel<4>> {
        Ok(GateModel {
            schedule: self.interaction_schedule()?,
            noise_operator: transmon_noise_operator(),
            basis: CMat::identity(),
        })
    }

    /// Infidelity and intrinsic leakage of the noiseless gate.
    pub fn performance(&self, steps: Option<usize>) -> Result<NotPerformance> {
        let schedule = self.interaction_schedule()?;
        let u = propagate_final(&schedule, steps.unwrap_or_else(|| self.default_steps()))?;
        Ok(NotPerformance { infidelity: not_infidelity(&u), leakage: subspace_leakage(&u, 2, None) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NotPerformance {
    pub infidelity: f64,
    pub leakage: f64,
}

/// Average-gate infidelity of the qubit block against NOT, maximised over
/// single-qubit Z phases before and after the gate.
pub fn not_infidelity(u: &CMat<4>) -> f64 {
    let (m00, m01, m10, m11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let frob = m00.norm_sqr() + m01.norm_sqr() + m10.norm_sqr() + m11.norm_sqr();
    let overlap = m01.norm() + m10.norm();
    1.0 - (frob + overlap * overlap) / 6.0
}

/// Three-level rotating-frame model with a real cosine pulse of area π,
/// `Ω(t) = (π/T)[1 − cos(2πt/T)]`, and `V₀ = diag(0, 1, 2)`.
pub fn not_rotating_model(eta: f64, duration: f64) -> Result<GateModel<3>> {
    positive("eta", eta)?;
    positive("duration", duration)?;
    let schedule = HamiltonianSchedule::new(duration, 2, move |t| {
        let om = PI / duration * (1.0 - (2.0 * PI * t / duration).cos());
        let mut h = CMat::<3>::zeros();
        h[(0, 1)] = c(om / 2.0, 0.0);
        h[(1, 0)] = c(om / 2.0, 0.0);
        h[(1, 2)] = c(om * FRAC_1_SQRT_2, 0.0);
        h[(2, 1)] = h[(1, 2)];
        h[(2, 2)] = c(-eta, 0.0);
        h
    })?;
    Ok(GateModel { schedule, noise_operator: real_diag([0.0, 1.0, 2.0]), basis: CMat::identity() })
}

/// Optimised NOT pulse and its noiseless performance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DragOptimum {
    pub spec: NotGateSpec,
    pub performance: NotPerformance,
    pub evaluations: usize,
}

impl DragOptimum {
    /// Whether the noiseless leakage is at or below [`DRAG_LEAKAGE_TOL`].
    /// Short gates (around 10 ns) cannot reach it with three parameters.
    pub fn meets_leakage_target(&self) -> bool {
        self.performance.leakage <= DRAG_LEAKAGE_TOL
    }
}

pub const DRAG_INFIDELITY_TOL: f64 = 1e-5;
pub const DRAG_LEAKAGE_TOL: f64 = 1e-7;

/// Nelder–Mead over `(Ω₁, Ω₂, ω)` starting from the rotating-wave pulse
/// area `Ω₁ = π/T`, first-order derivative removal `|Ω₂| = πΩ₁/(ηT)` (both
/// signs tried) and `ω = ω₀₁`.
///
/// Fails only if the infidelity exceeds [`DRAG_INFIDELITY_TOL`]. A leakage
/// above [`DRAG_LEAKAGE_TOL`] is reported through
/// [`DragOptimum::meets_leakage_target`].
pub fn optimize_drag(omega01: f64, eta: f64, duration: f64) -> Result<DragOptimum> {
    let best = optimize_pulse(omega01, eta, duration, true)?;
    if !(best.performance.infidelity <= DRAG_INFIDELITY_TOL) {
        return Err(Error::Optimizer { best: best.performance.infidelity });
    }
    Ok(best)
}

/// Best pulse found without any tolerance check; with `drag = false` the
/// quadrature is pinned at `Ω₂ = 0` and only `(Ω₁, ω)` are optimised.
pub fn optimize_pulse(omega01: f64, eta: f64, duration: f64, drag: bool) -> Result<DragOptimum> {
    positive("omega01", omega01)?;
    positive("eta", eta)?;
    if !(duration >= 10.0) {
        return Err(Error::param("duration", format!("NOT optimisation needs T >= 10 ns, got {duration}")));
    }
    let omega1 = PI / duration;
    let omega2 = PI * omega1 / (eta * duration);
    let base = NotGateSpec { omega01, eta, duration, drive_frequency: omega01, omega1, omega2: 0.0 };
    let steps = base.default_steps();
    let build = |x: &[f64]| -> NotGateSpec {
        NotGateSpec {
            omega1: omega1 * (1.0 + x[0]),
            omega2: if drag { omega2 * x[1] } else { 0.0 },
            drive_frequency: omega01 + x[2] * eta * 1e-2,
            ..base
        }
    };
    let mut evaluations = 0;
    let mut objective = |x: &[f64]| -> f64 {
        evaluations += 1;
        match build(x).performance(Some(steps)) {
            Ok(p) => p.infidelity + p.leakage,
            Err(_) => 1.0,
        }
    };
    let starts: Vec<[f64; 3]> = if drag { vec![[0.0, 1.0, 0.0], [0.0, -1.0, 0.0]] } else { vec![[0.0, 0.0, 0.0]] };
    let mut opts = NelderMeadOptions::new(vec![0.02, 0.3, 0.5]);
    opts.max_evaluations = 2000;
    let mut best: Option<crate::optim::Minimum> = None;
    for s in &starts {
        let m = nelder_mead(&mut objective, s, &opts);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    let mut best = best.expect("at least one start");
    // restart from the best vertex to shed simplex degeneracy
    for _ in 0..3 {
        let m = nelder_mead(&mut objective, &best.x, &opts);
        let improved = m.value < best.value * 0.999;
        if m.value < best.value {
            best = m;
        }
        if !improved {
            break;
        }
    }
    let spec = build(&best.x);
    let performance = spec.performance(Some(steps))?;
    Ok(DragOptimum { spec, performance, evaluations })
}

/// `P = 3π²/(4η²T T_φ⁽¹⁾)` (white) or `π²/(7η³T[T_φ⁽²⁾]²)` (1/f).
pub fn not_gate_closed_form(eta: f64, duration: f64, noise: NoiseSpec) -> Result<LeakageResult> {
    positive("eta", eta)?;
    positive("duration", duration)?;
    let p = match noise {
        NoiseSpec::White { t_phi_1 } => {
            positive("t_phi_1", t_phi_1)?;
            3.0 * PI * PI / (4.0 * eta * eta * duration * t_phi_1)
        }
        NoiseSpec::OneOverF { t_phi_2 } => {
            positive("t_phi_2", t_phi_2)?;
            PI * PI / (7.0 * eta.powi(3) * duration * t_phi_2 * t_phi_2)
        }
    };
    let mut r = LeakageResult::new(p, Method::ClosedForm);
    r.peak_frequencies = vec![eta];
    Ok(r)
}

/// First-order leakage of an optimised NOT pulse from simulated amplitudes.
pub fn not_leakage_numeric(spec: &NotGateSpec, s: &SpectralDensity) -> Result<LeakageResult> {
    let model = spec.model()?;
    let steps = spec.default_steps();
    let traces = model.amplitude_traces(steps)?;
    let mut r = leakage_exact(&traces, s, 2)?;
    r.grid = GridMeta { steps, ..r.grid };
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ghz_to_rad_per_ns, mhz_to_rad_per_ns};

    #[test]
    fn eigensystem_products() {
        for (g, d) in [(0.3, 6.0), (0.3, -1.0), (1.0, 0.0)] {
            let e = cz_eigensystem(g, d);
            assert!((e.e_plus * e.e_minus + g * g).abs() < 1e-12);
            assert!((e.e_plus + e.e_minus - d).abs() < 1e-12);
            let h = CMat::<2>::new(c(0.0, 0.0), c(g, 0.0), c(g, 0.0), c(d, 0.0));
            assert!((h * e.psi_minus - e.psi_minus * c(e.e_minus, 0.0)).norm() < 1e-12);
            assert!((h * e.psi_plus - e.psi_plus * c(e.e_plus, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn static_trajectory_and_endpoints() {
        let g = mhz_to_rad_per_ns(50.0);
        let d0 = ghz_to_rad_per_ns(1.0);
        let s = AdiabaticCZSpec::new(g, d0, 20.0, 0.0, 0.0).unwrap();
        for t in [0.0, 3.0, 11.0, 20.0] {
            assert!((s.detuning(t) - d0).abs() < 1e-9 * d0);
        }
        let s = AdiabaticCZSpec::new(g, d0, 20.0, 0.6, 0.1).unwrap();
        assert!((s.detuning(20.0) - d0).abs() < 1e-9 * d0);
        assert!((s.detuning(0.0) - d0).abs() < 1e-9 * d0);
    }

    #[test]
    fn trajectory_out_of_range() {
        let g = mhz_to_rad_per_ns(50.0);
        let s = AdiabaticCZSpec::new(g, ghz_to_rad_per_ns(1.0), 20.0, 1.6, 0.0).unwrap();
        assert!(matches!(s.schedule(), Err(Error::TrajectoryOutOfRange { .. })));
    }

    #[test]
    fn short_adiabatic_gate_rejected() {
        let g = mhz_to_rad_per_ns(50.0);
        assert!(optimize_adiabatic(g, ghz_to_rad_per_ns(1.0), 9.0).is_err());
    }

    #[test]
    fn closed_forms() {
        let g = mhz_to_rad_per_ns(50.0);
        let spec = RapidCZSpec::new(g).unwrap();
        let r = rapid_cz_closed_form(&spec, NoiseSpec::White { t_phi_1: 1e5 }, Variant::Exact).unwrap();
        assert!((r.probability - 5e-5).abs() < 1e-15);
        let r = always_on_limit(ghz_to_rad_per_ns(0.5), 1e5).unwrap();
        assert!((r.probability - 4e-5).abs() < 1e-15);
        let eta = mhz_to_rad_per_ns(260.0);
        let w = not_gate_closed_form(eta, 20.0, NoiseSpec::White { t_phi_1: 1e5 }).unwrap();
        assert!((w.probability - 1.387e-6).abs() < 1e-9, "{}", w.probability);
        let f = not_gate_closed_form(eta, 20.0, NoiseSpec::OneOverF { t_phi_2: 1e3 }).unwrap();
        assert!((f.probability - 1.617e-8).abs() < 1e-11, "{}", f.probability);
        let slow = not_gate_closed_form(eta, 2e6, NoiseSpec::White { t_phi_1: 1e5 }).unwrap();
        assert!(slow.probability < 1e-10);
    }

    #[test]
    fn infidelity_of_ideal_and_idle() {
        let mut x = CMat::<4>::identity();
        x[(0, 0)] = c(0.0, 0.0);
        x[(1, 1)] = c(0.0, 0.0);
        x[(0, 1)] = c(0.0, 1.0);
        x[(1, 0)] = c(-1.0, 0.0);
        assert!(not_infidelity(&x).abs() < 1e-15);
        let idle = not_infidelity(&CMat::<4>::identity());
        assert!((idle - 2.0 / 3.0).abs() < 1e-15);
    }
}
