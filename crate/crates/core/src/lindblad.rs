//! Lindblad master equation with a single diagonal jump operator,
//!
//! ```text
//! dρ/dt = −i[H, ρ] + λ (LρL† − ½L†Lρ − ½ρL†L),   L = diag(l₀, …, l_{N−1}).
//! ```
//!
//! For diagonal `L` the dissipator acts entrywise, `ρ_ij ↦ −(λ/2)(l_i − l_j)² ρ_ij`.

use crate::error::{Error, Result};
use crate::evolution::HamiltonianSchedule;
use crate::gates::{AdiabaticCZSpec, NotGateSpec, RapidCZSpec};
use crate::leakage::{GridMeta, LeakageResult, Method};
use crate::linalg::{hermiticity_error, hermitian_eigenvalues, CMat, CVec, C64, I};

pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct LindbladModel<const N: usize> {
    pub schedule: HamiltonianSchedule<N>,
    /// Diagonal of the jump operator `L`.
    pub jump_diagonal: [f64; N],
    /// `λ` in 1/ns.
    pub rate: f64,
}

impl<const N: usize> LindbladModel<N> {
    pub fn new(schedule: HamiltonianSchedule<N>, jump_diagonal: [f64; N], rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::param("rate", format!("must be finite and non-negative, got {rate}")));
        }
        Ok(Self { schedule, jump_diagonal, rate })
    }

    fn decay_matrix(&self) -> [[f64; N]; N] {
        let mut d = [[0.0; N]; N];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let diff = self.jump_diagonal[i] - self.jump_diagonal[j];
                *v = -0.5 * self.rate * diff * diff;
            }
        }
        d
    }
}

/// A validated density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix<const N: usize>(pub CMat<N>);

impl<const N: usize> DensityMatrix<N> {
    pub fn new(rho: CMat<N>) -> Result<Self> {
        let d = DensityMatrix(rho);
        d.check()?;
        Ok(d)
    }

    pub fn pure(psi: &CVec<N>) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    pub fn basis_state(k: usize) -> Self {
        let mut m = CMat::<N>::zeros();
        m[(k, k)] = C64::new(1.0, 0.0);
        DensityMatrix(m)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.0)[0]
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &CVec<N>) -> f64 {
        (psi.adjoint() * self.0 * psi)[(0, 0)].re
    }

    pub fn check(&self) -> Result<()> {
        if hermiticity_error(&self.0) > 1e-10 {
            return Err(Error::param("rho", "density matrix must be Hermitian"));
        }
        if (self.trace() - 1.0).abs() > TRACE_TOL {
            return Err(Error::param("rho", format!("trace must be 1, got {}", self.trace())));
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::Positivity { min_eigenvalue: min });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DensityTrace<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix<N>>,
}

impl<const N: usize> DensityTrace<N> {
    pub fn last(&self) -> &DensityMatrix<N> {
        self.states.last().expect("trace is never empty")
    }
}

#[inline]
fn generator<const N: usize>(h: &CMat<N>, decay: &[[f64; N]; N], rho: &CMat<N>) -> CMat<N> {
    let comm = h * rho - rho * h;
    let mut out = comm * (-I);
    for i in 0..N {
        for j in 0..N {
            out[(i, j)] += rho[(i, j)] * decay[i][j];
        }
    }
    out
}

fn step<const N: usize>(model: &LindbladModel<N>, decay: &[[f64; N]; N], t: f64, dt: f64, rho: &CMat<N>) -> CMat<N> {
    let h0 = model.schedule.at(t);
    let hm = model.schedule.at(t + 0.5 * dt);
    let h1 = model.schedule.at(t + dt);
    let half = C64::new(0.5 * dt, 0.0);
    let k1 = generator(&h0, decay, rho);
    let k2 = generator(&hm, decay, &(rho + k1 * half));
    let k3 = generator(&hm, decay, &(rho + k2 * half));
    let k4 = generator(&h1, decay, &(rho + k3 * C64::new(dt, 0.0)));
    let next = rho + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
    (next + next.adjoint()) * C64::new(0.5, 0.0)
}

fn check_inputs<const N: usize>(rho0: &DensityMatrix<N>, steps: usize) -> Result<()> {
    if steps < 1000 {
        return Err(Error::param("steps", format!("need at least 1000 steps, got {steps}")));
    }
    rho0.check()
}

/// Fixed-step RK4 solution sampled at every step.
pub fn solve<const N: usize>(model: &LindbladModel<N>, rho0: &DensityMatrix<N>, steps: usize) -> Result<DensityTrace<N>> {
    check_inputs(rho0, steps)?;
    let decay = model.decay_matrix();
    let dt = model.schedule.duration / steps as f64;
    let mut rho = rho0.0;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(*rho0);
    for k in 0..steps {
        rho = step(model, &decay, k as f64 * dt, dt, &rho);
        if k % 256 == 255 {
            DensityMatrix(rho).check()?;
        }
        times.push((k + 1) as f64 * dt);
        states.push(DensityMatrix(rho));
    }
    DensityMatrix(rho).check()?;
    Ok(DensityTrace { times, states })
}

/// `ρ(T)` only.
pub fn solve_final<const N: usize>(model: &LindbladModel<N>, rho0: &DensityMatrix<N>, steps: usize) -> Result<DensityMatrix<N>> {
    check_inputs(rho0, steps)?;
    let decay = model.decay_matrix();
    let dt = model.schedule.duration / steps as f64;
    let mut rho = rho0.0;
    for k in 0..steps {
        rho = step(model, &decay, k as f64 * dt, dt, &rho);
        if k % 1024 == 1023 {
            DensityMatrix(rho).check()?;
        }
    }
    let out = DensityMatrix(rho);
    out.check()?;
    Ok(out)
}

/// Exact solution of the rapid controlled-phase model with `λ = 4/T_φ⁽¹⁾`:
/// `P = ½(1 − e^{−T/T_φ⁽¹⁾})`.
pub fn cz_rapid_exact(t_phi_1: f64, duration: f64) -> Result<LeakageResult> {
    if !(t_phi_1 > 0.0) {
        return Err(Error::param("t_phi_1", format!("must be positive, got {t_phi_1}")));
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::param("duration", format!("must be finite and non-negative, got {duration}")));
    }
    Ok(LeakageResult::new(-0.5 * (-duration / t_phi_1).exp_m1(), Method::ClosedForm))
}

/// Controlled-phase gate accepted by [`cz_leakage_sim`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CzGate {
    Rapid(RapidCZSpec),
    Adiabatic(AdiabaticCZSpec),
}

impl From<RapidCZSpec> for CzGate {
    fn from(s: RapidCZSpec) -> Self {
        CzGate::Rapid(s)
    }
}

impl From<AdiabaticCZSpec> for CzGate {
    fn from(s: AdiabaticCZSpec) -> Self {
        CzGate::Adiabatic(s)
    }
}

fn rate_from(t_phi_1: f64, numerator: f64) -> Result<f64> {
    if !(t_phi_1 > 0.0) {
        return Err(Error::param("t_phi_1", format!("must be positive, got {t_phi_1}")));
    }
    Ok(numerator / t_phi_1)
}

/// Two-level master equation with `L = diag(0, 1)` and `λ = 4/T_φ⁽¹⁾`,
/// started in the computational state; `T_φ⁽¹⁾ = ∞` gives the noiseless gate.
pub fn cz_leakage_sim(spec: impl Into<CzGate>, t_phi_1: f64) -> Result<LeakageResult> {
    let model = match spec.into() {
        CzGate::Rapid(s) => s.model()?,
        CzGate::Adiabatic(s) => s.model()?,
    };
    let steps = model.schedule.default_steps();
    let p = model.master_equation_leakage(rate_from(t_phi_1, 4.0)?, steps)?;
    let mut r = LeakageResult::new(p, Method::MasterEquation);
    r.grid = GridMeta { steps, tolerance: TRACE_TOL };
    Ok(r)
}

/// Four-level master equation with `L = diag(0, 1, 2, 3)` and
/// `λ = 2/T_φ⁽¹⁾`, averaged over `|0⟩` and `|1⟩`. The reported probability
/// has the noiseless leakage subtracted; that baseline sits in `intrinsic`.
pub fn not_leakage_sim(spec: &NotGateSpec, t_phi_1: f64) -> Result<LeakageResult> {
    let model = spec.model()?;
    let steps = spec.master_equation_steps();
    let rate = rate_from(t_phi_1, 2.0)?;
    let noisy = model.master_equation_leakage(rate, steps)?;
    let baseline = model.master_equation_leakage(0.0, steps)?;
    let mut r = LeakageResult::new(noisy - baseline, Method::MasterEquation);
    r.intrinsic = Some(baseline);
    r.grid = GridMeta { steps, tolerance: TRACE_TOL };
    Ok(r)
}
