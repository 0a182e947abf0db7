//! Property checks shared by the property tests and the acceptance suite.
//! Each returns the measured defect so callers can compare against their
//! own tolerance.
#![allow(dead_code)]

use std::f64::consts::PI;

use transmon_leakage::evolution::{propagate, HamiltonianSchedule};
use transmon_leakage::gates::RapidCZSpec;
use transmon_leakage::leakage::{leakage_exact, leakage_peaked, spectral_amplitude, AmplitudeTrace};
use transmon_leakage::linalg::{c, hermiticity_error, CMat, CVec, C64};
use transmon_leakage::lindblad::{solve, DensityMatrix, LindbladModel};
use transmon_leakage::noise::SpectralDensity;
use transmon_leakage::quad::{integrate_breaks, QuadOptions};

/// Random Hermitian 3×3 matrix from nine real numbers in `[-1, 1]`.
pub fn hermitian3(p: &[f64; 9]) -> CMat<3> {
    let mut h = CMat::<3>::zeros();
    h[(0, 0)] = c(p[0], 0.0);
    h[(1, 1)] = c(p[1], 0.0);
    h[(2, 2)] = c(p[2], 0.0);
    h[(0, 1)] = c(p[3], p[4]);
    h[(1, 2)] = c(p[5], p[6]);
    h[(0, 2)] = c(p[7], p[8]);
    h[(1, 0)] = h[(0, 1)].conj();
    h[(2, 1)] = h[(1, 2)].conj();
    h[(2, 0)] = h[(0, 2)].conj();
    h
}

/// `H(t) = A + cos(νt) B`; returns the worst `‖U†U − I‖` along the path.
pub fn unitarity_defect(a: [f64; 9], b: [f64; 9], nu: f64, duration: f64) -> f64 {
    let (ha, hb) = (hermitian3(&a), hermitian3(&b));
    let s = HamiltonianSchedule::new(duration, 2, move |t| ha + hb * c((nu * t).cos(), 0.0)).unwrap();
    propagate(&s, s.default_steps()).unwrap().max_unitarity_error()
}

/// Worst trace and Hermiticity defects of a random three-level Lindblad
/// solution started in a random pure state.
pub fn lindblad_defects(a: [f64; 9], jump: [f64; 3], rate: f64, psi: [f64; 6], duration: f64) -> (f64, f64) {
    let ha = hermitian3(&a);
    let s = HamiltonianSchedule::new(duration, 2, move |t| ha * c(1.0 + 0.5 * (t).sin(), 0.0)).unwrap();
    let model = LindbladModel::new(s, jump, rate).unwrap();
    let mut v = CVec::<3>::new(c(psi[0], psi[1]), c(psi[2], psi[3]), c(psi[4], psi[5]));
    if v.norm() < 1e-3 {
        v = CVec::<3>::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    }
    let v = v / c(v.norm(), 0.0);
    let steps = model.schedule.default_steps().max(2000);
    let tr = solve(&model, &DensityMatrix::pure(&v).unwrap(), steps).unwrap();
    let trace = tr.states.iter().map(|r| (r.trace() - 1.0).abs()).fold(0.0, f64::max);
    let herm = tr.states.iter().map(|r| hermiticity_error(&r.0)).fold(0.0, f64::max);
    (trace, herm)
}

/// Smooth amplitude vanishing at both ends: `Σ_k c_k sin(kπt/T) e^{iνt}`.
pub fn smooth_trace(coeffs: [f64; 6], nu: f64, duration: f64, steps: usize) -> AmplitudeTrace {
    let dt = duration / steps as f64;
    let values = (0..=steps)
        .map(|k| {
            let t = k as f64 * dt;
            let mut a = C64::new(0.0, 0.0);
            for m in 0..3 {
                a += c(coeffs[2 * m], coeffs[2 * m + 1]) * ((m + 1) as f64 * PI * t / duration).sin();
            }
            a * C64::from_polar(1.0, nu * t)
        })
        .collect();
    AmplitudeTrace { source: 0, target: 1, dt, values }
}

/// Relative gap between `∫|Ã(ω)|² dω/2π` and `∫|A(t)|² dt`.
pub fn parseval_gap(trace: &AmplitudeTrace, nu: f64) -> f64 {
    let time = trace.time_energy();
    let t = trace.duration();
    let w = 2.0 * PI / t;
    // |Ã|² falls as ω⁻⁴ away from −ν; cut far enough that the tail is < 1e-9
    let half_width = 400.0 * w;
    let n = 800;
    let centre = -nu;
    let breaks: Vec<f64> = (0..=n).map(|k| centre - half_width + 2.0 * half_width * k as f64 / n as f64).collect();
    let r = integrate_breaks(|om| spectral_amplitude(trace, om).norm_sqr(), &breaks, QuadOptions::rel(1e-9)).unwrap();
    (r.value / (2.0 * PI) - time).abs() / time
}

/// Rapid-CZ analytic amplitude as a sampled trace.
pub fn rapid_trace(g: f64, steps: usize) -> AmplitudeTrace {
    RapidCZSpec::new(g).unwrap().analytic_trace(steps)
}

/// Relative gap between peaked and exact leakage for white noise.
pub fn white_peaked_exact_gap(traces: &[AmplitudeTrace], s0: f64) -> f64 {
    let s = SpectralDensity::white(s0).unwrap();
    let e = leakage_exact(traces, &s, 1).unwrap().probability;
    let p = leakage_peaked(traces, &s, 1).unwrap().probability;
    (e - p).abs() / e.abs()
}

/// Relative defect of `P[k·S] = k·P[S]` for the exact integral.
pub fn linearity_gap(traces: &[AmplitudeTrace], s: &SpectralDensity, k: f64) -> f64 {
    let base = leakage_exact(traces, s, 1).unwrap().probability;
    let scaled = leakage_exact(traces, &s.scaled(k), 1).unwrap().probability;
    (scaled - k * base).abs() / (k * base).abs()
}
