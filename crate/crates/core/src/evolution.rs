//! Fixed-step integration of `dU/dt = −i H₀(t) U` for small dense Hamiltonians.
//!
//! All integrators are classical RK4 on a uniform grid. Propagators are pulled
//! back onto the unitary group after every step, and state vectors are
//! renormalised, so sampled traces stay physical over long sweeps.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{
    hermiticity_error, is_diagonal, operator_norm, polar_project, unitarity_error, CMat, CVec, C64, I,
};

/// Maximum tolerated `‖U†U − I‖_max` along a trace.
pub const UNITARITY_TOL: f64 = 1e-10;

type HamiltonianFn<const N: usize> = dyn Fn(f64) -> CMat<N> + Send + Sync;

/// Time-dependent Hermitian `H₀(t)` on `[0, duration]`, entries in rad/ns.
///
/// The first `qubit_dim` basis states span the computational subspace `Q`;
/// the remainder span the auxiliary subspace `A`.
#[derive(Clone)]
pub struct HamiltonianSchedule<const N: usize> {
    h: Arc<HamiltonianFn<N>>,
    pub duration: f64,
    pub qubit_dim: usize,
}

impl<const N: usize> std::fmt::Debug for HamiltonianSchedule<N> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HamiltonianSchedule")
            .field("dim", &N)
            .field("duration", &self.duration)
            .field("qubit_dim", &self.qubit_dim)
            .finish()
    }
}

impl<const N: usize> HamiltonianSchedule<N> {
    pub fn new(duration: f64, qubit_dim: usize, h: impl Fn(f64) -> CMat<N> + Send + Sync + 'static) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::param("duration", format!("must be positive and finite, got {duration}")));
        }
        if qubit_dim == 0 || qubit_dim >= N {
            return Err(Error::param("qubit_dim", format!("need 0 < qubit_dim < {N}, got {qubit_dim}")));
        }
        Ok(Self { h: Arc::new(h), duration, qubit_dim })
    }

    pub const fn dim(&self) -> usize {
        N
    }

    pub fn at(&self, t: f64) -> CMat<N> {
        (self.h)(t)
    }

    /// Max `‖H₀(t)‖` over 257 evenly spaced samples.
    pub fn max_norm(&self) -> f64 {
        (0..=256).map(|k| operator_norm(&self.at(self.duration * k as f64 / 256.0))).fold(0.0, f64::max)
    }

    /// Max Hermiticity defect over 257 samples.
    pub fn hermiticity_defect(&self) -> f64 {
        (0..=256).map(|k| hermiticity_error(&self.at(self.duration * k as f64 / 256.0))).fold(0.0, f64::max)
    }

    /// `max(1000, 200·T·max‖H₀‖)` rounded up to a multiple of 100, so that
    /// sampled traces can be decimated by small integer strides.
    pub fn default_steps(&self) -> usize {
        let n = (200.0 * self.duration * self.max_norm()).ceil() as usize;
        n.max(1000).div_ceil(100) * 100
    }

    pub fn qubit_mask(&self) -> [bool; N] {
        let mut mask = [false; N];
        for m in mask.iter_mut().take(self.qubit_dim) {
            *m = true;
        }
        mask
    }
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < 100 {
        return Err(Error::param("steps", format!("need at least 100 steps, got {steps}")));
    }
    Ok(())
}

/// Sampled `U₀(t_k)` on the uniform grid `t_k = k·T/steps`.
#[derive(Debug, Clone)]
pub struct PropagatorTrace<const N: usize> {
    pub times: Vec<f64>,
    pub unitaries: Vec<CMat<N>>,
    /// `true` for basis states in `Q`.
    pub qubit_mask: [bool; N],
}

impl<const N: usize> PropagatorTrace<N> {
    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn final_unitary(&self) -> &CMat<N> {
        self.unitaries.last().expect("trace is never empty")
    }

    pub fn projector_q(&self) -> CMat<N> {
        mask_projector(&self.qubit_mask)
    }

    pub fn projector_a(&self) -> CMat<N> {
        mask_projector(&self.qubit_mask.map(|q| !q))
    }

    /// Re-expresses every sample in the basis whose columns are `basis`:
    /// `U ↦ B† U B`.
    pub fn in_basis(&self, basis: &CMat<N>) -> Self {
        Self {
            times: self.times.clone(),
            unitaries: self.unitaries.iter().map(|u| basis.adjoint() * u * basis).collect(),
            qubit_mask: self.qubit_mask,
        }
    }

    pub fn max_unitarity_error(&self) -> f64 {
        self.unitaries.iter().map(unitarity_error).fold(0.0, f64::max)
    }
}

pub fn mask_projector<const N: usize>(mask: &[bool; N]) -> CMat<N> {
    let mut p = CMat::<N>::zeros();
    for (k, &on) in mask.iter().enumerate() {
        if on {
            p[(k, k)] = C64::new(1.0, 0.0);
        }
    }
    p
}

/// Interaction-picture noise operator `V₁(t_k) = U₀† V₀ U₀`.
#[derive(Debug, Clone)]
pub struct OperatorTrace<const N: usize> {
    pub times: Vec<f64>,
    pub matrices: Vec<CMat<N>>,
}

impl<const N: usize> OperatorTrace<N> {
    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// `V ↦ B† V B` at every sample.
    pub fn in_basis(&self, basis: &CMat<N>) -> Self {
        Self { times: self.times.clone(), matrices: self.matrices.iter().map(|m| basis.adjoint() * m * basis).collect() }
    }
}

/// One RK4 step of `dU/dt = −i(H(t) + offset)U` followed by polar projection.
#[inline]
fn rk4_unitary<const N: usize>(
    h: &HamiltonianFn<N>,
    offset: Option<&CMat<N>>,
    t: f64,
    dt: f64,
    u: &CMat<N>,
) -> CMat<N> {
    let gen = |t: f64| -> CMat<N> {
        let mut m = h(t);
        if let Some(o) = offset {
            m += o;
        }
        m * (-I)
    };
    let g0 = gen(t);
    let gm = gen(t + 0.5 * dt);
    let g1 = gen(t + dt);
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let k1 = g0 * u;
    let k2 = gm * (u + k1 * half);
    let k3 = gm * (u + k2 * half);
    let k4 = g1 * (u + k3 * full);
    let next = u + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
    polar_project(&next)
}

#[inline]
fn rk4_state<const N: usize>(h: &HamiltonianFn<N>, t: f64, dt: f64, psi: &CVec<N>) -> CVec<N> {
    let gen = |t: f64| h(t) * (-I);
    let g0 = gen(t);
    let gm = gen(t + 0.5 * dt);
    let g1 = gen(t + dt);
    let half = C64::new(0.5 * dt, 0.0);
    let k1 = g0 * psi;
    let k2 = gm * (psi + k1 * half);
    let k3 = gm * (psi + k2 * half);
    let k4 = g1 * (psi + k3 * C64::new(dt, 0.0));
    let next = psi + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
    let norm = next.norm();
    next / C64::new(norm, 0.0)
}

pub fn propagate<const N: usize>(schedule: &HamiltonianSchedule<N>, steps: usize) -> Result<PropagatorTrace<N>> {
    check_steps(steps)?;
    let dt = schedule.duration / steps as f64;
    let mut u = CMat::<N>::identity();
    let mut times = Vec::with_capacity(steps + 1);
    let mut unitaries = Vec::with_capacity(steps + 1);
    times.push(0.0);
    unitaries.push(u);
    let mut drift: f64 = 0.0;
    for k in 0..steps {
        u = rk4_unitary(schedule.h.as_ref(), None, k as f64 * dt, dt, &u);
        if k % 64 == 63 || k + 1 == steps {
            drift = drift.max(unitarity_error(&u));
        }
        times.push((k + 1) as f64 * dt);
        unitaries.push(u);
    }
    if drift > UNITARITY_TOL {
        return Err(Error::UnitarityDrift { drift });
    }
    Ok(PropagatorTrace { times, unitaries, qubit_mask: schedule.qubit_mask() })
}

/// `U₀(T)` only, without storing the trace.
pub fn propagate_final<const N: usize>(schedule: &HamiltonianSchedule<N>, steps: usize) -> Result<CMat<N>> {
    propagate_final_with_noise(schedule, None, steps)
}

/// `U(T)` for `H₀(t) + ε_k V₀`, with `ε_k` held constant over step `k`.
pub fn propagate_final_with_noise<const N: usize>(
    schedule: &HamiltonianSchedule<N>,
    noise: Option<(&CMat<N>, &[f64])>,
    steps: usize,
) -> Result<CMat<N>> {
    check_steps(steps)?;
    if let Some((_, eps)) = noise {
        if eps.len() < steps {
            return Err(Error::DimensionMismatch { expected: steps, got: eps.len() });
        }
    }
    let dt = schedule.duration / steps as f64;
    let mut u = CMat::<N>::identity();
    for k in 0..steps {
        let offset = noise.map(|(v0, eps)| v0 * C64::new(eps[k], 0.0));
        u = rk4_unitary(schedule.h.as_ref(), offset.as_ref(), k as f64 * dt, dt, &u);
    }
    let drift = unitarity_error(&u);
    if drift > UNITARITY_TOL {
        return Err(Error::UnitarityDrift { drift });
    }
    Ok(u)
}

pub fn interaction_frame_operator<const N: usize>(trace: &PropagatorTrace<N>, v0: &CMat<N>) -> Result<OperatorTrace<N>> {
    if !is_diagonal(v0, 1e-14) || hermiticity_error(v0) > 1e-14 {
        return Err(Error::param("v0", "noise operator must be real diagonal in the model basis"));
    }
    let matrices = trace.unitaries.iter().map(|u| u.adjoint() * v0 * u).collect();
    Ok(OperatorTrace { times: trace.times.clone(), matrices })
}

#[derive(Debug, Clone)]
pub struct StateTrace<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<CVec<N>>,
}

impl<const N: usize> StateTrace<N> {
    /// `|⟨k|ψ(t)⟩|²` along the trace.
    pub fn populations(&self, level: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[level].norm_sqr()).collect()
    }
}

pub fn evolve_state<const N: usize>(
    schedule: &HamiltonianSchedule<N>,
    psi0: &CVec<N>,
    steps: usize,
) -> Result<StateTrace<N>> {
    check_steps(steps)?;
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::param("psi0", format!("state must be normalised, norm = {}", psi0.norm())));
    }
    let dt = schedule.duration / steps as f64;
    let mut psi = *psi0;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(psi);
    for k in 0..steps {
        psi = rk4_state(schedule.h.as_ref(), k as f64 * dt, dt, &psi);
        times.push((k + 1) as f64 * dt);
        states.push(psi);
    }
    Ok(StateTrace { times, states })
}

/// `ψ(T)` only.
pub fn evolve_state_final<const N: usize>(
    schedule: &HamiltonianSchedule<N>,
    psi0: &CVec<N>,
    steps: usize,
) -> Result<CVec<N>> {
    check_steps(steps)?;
    let dt = schedule.duration / steps as f64;
    let mut psi = *psi0;
    for k in 0..steps {
        psi = rk4_state(schedule.h.as_ref(), k as f64 * dt, dt, &psi);
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff, real_diag};

    fn rapid(g: f64) -> HamiltonianSchedule<2> {
        let h = CMat::<2>::new(c(0.0, 0.0), c(g, 0.0), c(g, 0.0), c(0.0, 0.0));
        HamiltonianSchedule::new(std::f64::consts::PI / g, 1, move |_| h).unwrap()
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let s = HamiltonianSchedule::<3>::new(5.0, 2, |_| CMat::zeros()).unwrap();
        let tr = propagate(&s, 200).unwrap();
        assert!(tr.unitaries.iter().all(|u| max_abs_diff(u, &CMat::identity()) == 0.0));
        let psi = CVec::<3>::new(c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0));
        let st = evolve_state(&s, &psi, 200).unwrap();
        assert!(st.states.iter().all(|p| (p - psi).norm() < 1e-15));
    }

    #[test]
    fn rapid_cz_half_and_full_period() {
        let g = crate::mhz_to_rad_per_ns(50.0);
        let s = rapid(g);
        let tr = propagate(&s, 2000).unwrap();
        // t = π/(2g): |q⟩ → −i|a⟩
        let mid = tr.unitaries[1000];
        assert!((mid[(1, 0)] - c(0.0, -1.0)).norm() < 1e-10);
        assert!(mid[(0, 0)].norm() < 1e-10);
        let end = tr.final_unitary();
        assert!(max_abs_diff(end, &(-CMat::<2>::identity())) < 1e-10);
        // closed form at every sample
        for (t, u) in tr.times.iter().zip(&tr.unitaries) {
            let (co, si) = ((g * t).cos(), (g * t).sin());
            let exact = CMat::<2>::new(c(co, 0.0), c(0.0, -si), c(0.0, -si), c(co, 0.0));
            assert!(max_abs_diff(u, &exact) < 1e-8);
        }
    }

    #[test]
    fn frame_operator_identity_and_rapid_amplitude() {
        let g = crate::mhz_to_rad_per_ns(50.0);
        let tr = propagate(&rapid(g), 1000).unwrap();
        let id = interaction_frame_operator(&tr, &CMat::identity()).unwrap();
        assert!(id.matrices.iter().all(|m| max_abs_diff(m, &CMat::identity()) < 1e-12));
        let v1 = interaction_frame_operator(&tr, &real_diag([0.0, 1.0])).unwrap();
        for (t, m) in v1.times.iter().zip(&v1.matrices) {
            let expect = c(0.0, -0.5 * (2.0 * g * t).sin());
            assert!((m[(1, 0)] - expect).norm() < 1e-9);
        }
        let bad = CMat::<2>::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        assert!(interaction_frame_operator(&tr, &bad).is_err());
    }

    #[test]
    fn too_few_steps_rejected() {
        assert!(propagate(&rapid(1.0), 10).is_err());
    }

    #[test]
    fn unnormalised_state_rejected() {
        let psi = CVec::<2>::new(c(1.0, 0.0), c(1.0, 0.0));
        assert!(evolve_state(&rapid(1.0), &psi, 200).is_err());
    }

    #[test]
    fn fourth_order_convergence() {
        // smooth, non-commuting schedule
        let s = HamiltonianSchedule::<2>::new(4.0, 1, |t: f64| {
            CMat::<2>::new(c(0.0, 0.0), c(1.0 + 0.5 * t.sin(), 0.0), c(1.0 + 0.5 * t.sin(), 0.0), c(2.0 * t.cos(), 0.0))
        })
        .unwrap();
        let reference = propagate_final(&s, 16000).unwrap();
        let e1 = max_abs_diff(&propagate_final(&s, 200).unwrap(), &reference);
        let e2 = max_abs_diff(&propagate_final(&s, 400).unwrap(), &reference);
        assert!(e1 / e2 >= 8.0, "ratio {}", e1 / e2);
    }
}
