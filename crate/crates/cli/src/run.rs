//! Per-point computation for the gate subcommands.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use transmon_leakage::gates::{
    adiabatic_leakage, not_gate_closed_form, optimize_adiabatic, optimize_drag, rapid_cz_closed_form,
    AdiabaticCZSpec, AdiabaticMethod, GateModel, NoiseSpec, NotGateSpec, RapidCZSpec, Variant,
};
use transmon_leakage::leakage::{leakage_exact, leakage_peaked, AmplitudeTrace, LeakageResult};
use transmon_leakage::lindblad::{cz_leakage_sim, not_leakage_sim};
use transmon_leakage::noise::{derive_seed, SpectralDensity};
use transmon_leakage::{ghz_to_rad_per_ns, mhz_to_rad_per_ns, us_to_ns};

use crate::cache::{key, Bits, Cache, Entry};
use crate::cli::MethodName;
use crate::config::{GateParams, NoiseParams, RunConfig};

/// One output row. `None` fields are written empty (CSV) or null (JSON).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub gate_time_ns: f64,
    pub method: &'static str,
    pub leakage: Option<f64>,
    pub peak_frequency_rad_per_ns: Option<f64>,
    pub residual: Option<f64>,
    pub statistical_error: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub status: String,
}

impl Row {
    /// A value was produced (possibly with a validity warning).
    pub fn ok(&self) -> bool {
        self.leakage.is_some()
    }
}

fn noise_spec(n: &NoiseParams) -> NoiseSpec {
    match *n {
        NoiseParams::White { tphi1_us } => NoiseSpec::White { t_phi_1: us_to_ns(tphi1_us) },
        NoiseParams::Oneoverf { tphi2_us, .. } => NoiseSpec::OneOverF { t_phi_2: us_to_ns(tphi2_us) },
    }
}

fn spectrum(n: &NoiseParams, multiplicity: u8) -> transmon_leakage::Result<SpectralDensity> {
    let s = noise_spec(n).spectrum(multiplicity)?;
    match *n {
        NoiseParams::White { .. } => Ok(s),
        NoiseParams::Oneoverf { fmin_hz, fmax_hz, .. } => {
            SpectralDensity::one_over_f_with_cutoffs(s.amplitude, fmin_hz, fmax_hz)
        }
    }
}

/// Gate realised at one sweep point, after any optimisation.
enum Prepared {
    Rapid(RapidCZSpec),
    Adiabatic { spec: AdiabaticCZSpec, residual: f64 },
    Not { spec: NotGateSpec, infidelity: f64 },
}

impl Prepared {
    fn residual(&self) -> Option<f64> {
        match self {
            Prepared::Rapid(_) => None,
            Prepared::Adiabatic { residual, .. } => Some(*residual),
            Prepared::Not { infidelity, .. } => Some(*infidelity),
        }
    }
}

fn adiabatic_key(g: f64, d0: f64, t: f64) -> String {
    key("cz-adiabatic", &[("g", g), ("delta0", d0), ("duration", t)])
}

fn not_key(w: f64, eta: f64, t: f64) -> String {
    key("not", &[("omega01", w), ("eta", eta), ("duration", t)])
}

/// Builds the gate for `t`, using `cache` when possible. A fresh optimum is
/// returned alongside so the caller can store it.
fn prepare(
    gate: &GateParams,
    t: f64,
    cache: &Cache,
) -> transmon_leakage::Result<(Prepared, Option<(String, Entry)>)> {
    match *gate {
        GateParams::CzRapid { g_mhz } => {
            let g = g_mhz.map(mhz_to_rad_per_ns).unwrap_or(std::f64::consts::PI / t);
            Ok((Prepared::Rapid(RapidCZSpec::new(g)?), None))
        }
        GateParams::CzAdiabatic { g_mhz, delta0_ghz } => {
            let (g, d0) = (mhz_to_rad_per_ns(g_mhz), ghz_to_rad_per_ns(delta0_ghz));
            let k = adiabatic_key(g, d0, t);
            if let Some(Entry::CzAdiabatic { theta1, theta2, residual }) = cache.get(&k) {
                let spec = AdiabaticCZSpec::new(g, d0, t, theta1.0, theta2.0)?;
                return Ok((Prepared::Adiabatic { spec, residual: residual.0 }, None));
            }
            let opt = optimize_adiabatic(g, d0, t)?;
            let entry =
                Entry::CzAdiabatic { theta1: Bits(opt.spec.theta1), theta2: Bits(opt.spec.theta2), residual: Bits(opt.residual) };
            Ok((Prepared::Adiabatic { spec: opt.spec, residual: opt.residual }, Some((k, entry))))
        }
        GateParams::Not { f01_ghz, eta_mhz } => {
            let (w, eta) = (ghz_to_rad_per_ns(f01_ghz), mhz_to_rad_per_ns(eta_mhz));
            let k = not_key(w, eta, t);
            if let Some(Entry::Not { drive_frequency, omega1, omega2, infidelity, .. }) = cache.get(&k) {
                let spec = NotGateSpec {
                    omega01: w,
                    eta,
                    duration: t,
                    drive_frequency: drive_frequency.0,
                    omega1: omega1.0,
                    omega2: omega2.0,
                };
                spec.validate()?;
                return Ok((Prepared::Not { spec, infidelity: infidelity.0 }, None));
            }
            let opt = optimize_drag(w, eta, t)?;
            let s = opt.spec;
            let entry = Entry::Not {
                drive_frequency: Bits(s.drive_frequency),
                omega1: Bits(s.omega1),
                omega2: Bits(s.omega2),
                infidelity: Bits(opt.performance.infidelity),
                leakage: Bits(opt.performance.leakage),
            };
            Ok((Prepared::Not { spec: s, infidelity: opt.performance.infidelity }, Some((k, entry))))
        }
    }
}

/// Model handles shared by the trace-based methods of one point.
enum Model {
    Two(GateModel<2>),
    Four(GateModel<4>),
}

struct Point<'a> {
    cfg: &'a RunConfig,
    t: f64,
    gate: Prepared,
    traces: Option<transmon_leakage::Result<(Vec<AmplitudeTrace>, usize)>>,
}

impl Point<'_> {
    fn multiplicity(&self) -> u8 {
        match self.gate {
            Prepared::Not { .. } => 1,
            _ => 2,
        }
    }

    fn model(&self) -> transmon_leakage::Result<Model> {
        Ok(match &self.gate {
            Prepared::Rapid(s) => Model::Two(s.model()?),
            Prepared::Adiabatic { spec, .. } => Model::Two(spec.model()?),
            Prepared::Not { spec, .. } => Model::Four(spec.model()?),
        })
    }

    fn steps(&self, m: &Model) -> usize {
        self.cfg.steps.unwrap_or_else(|| match (m, &self.gate) {
            (_, Prepared::Not { spec, .. }) => spec.default_steps(),
            (Model::Two(m), _) => m.schedule.default_steps(),
            (Model::Four(m), _) => m.schedule.default_steps(),
        })
    }

    fn traces(&mut self) -> transmon_leakage::Result<&(Vec<AmplitudeTrace>, usize)> {
        if self.traces.is_none() {
            let computed = self.model().and_then(|m| {
                let steps = self.steps(&m);
                let tr = match &m {
                    Model::Two(m) => m.amplitude_traces(steps)?,
                    Model::Four(m) => m.amplitude_traces(steps)?,
                };
                Ok((tr, steps))
            });
            self.traces = Some(computed);
        }
        match self.traces.as_ref().expect("filled above") {
            Ok(v) => Ok(v),
            Err(e) => Err(e.clone()),
        }
    }

    fn qubit_dim(&self) -> usize {
        match self.gate {
            Prepared::Not { .. } => 2,
            _ => 1,
        }
    }

    fn white_tphi1_ns(&self) -> Result<f64, String> {
        match self.cfg.noise {
            NoiseParams::White { tphi1_us } => Ok(us_to_ns(tphi1_us)),
            NoiseParams::Oneoverf { .. } => Err("unsupported: master-eq needs white noise".into()),
        }
    }

    fn compute(&mut self, method: MethodName) -> Result<LeakageResult, String> {
        let s = spectrum(&self.cfg.noise, self.multiplicity()).map_err(|e| e.to_string())?;
        let noise = noise_spec(&self.cfg.noise);
        let err = |e: transmon_leakage::Error| e.to_string();
        match method {
            MethodName::ClosedForm => match &self.gate {
                Prepared::Rapid(spec) => rapid_cz_closed_form(spec, noise, Variant::Exact).map_err(err),
                Prepared::Adiabatic { spec, .. } => adiabatic_leakage(spec, &s, AdiabaticMethod::Analytic).map_err(err),
                Prepared::Not { spec, .. } => not_gate_closed_form(spec.eta, spec.duration, noise).map_err(err),
            },
            MethodName::ExactIntegral | MethodName::Peaked => {
                let dq = self.qubit_dim();
                let (traces, steps) = self.traces().map_err(err)?;
                let mut r = if method == MethodName::Peaked {
                    leakage_peaked(traces, &s, dq)
                } else {
                    leakage_exact(traces, &s, dq)
                }
                .map_err(err)?;
                r.grid.steps = *steps;
                Ok(r)
            }
            MethodName::MasterEq => {
                let tphi = self.white_tphi1_ns()?;
                match &self.gate {
                    Prepared::Rapid(spec) => cz_leakage_sim(*spec, tphi).map_err(err),
                    Prepared::Adiabatic { spec, .. } => cz_leakage_sim(*spec, tphi).map_err(err),
                    Prepared::Not { spec, .. } => not_leakage_sim(spec, tphi).map_err(err),
                }
            }
            MethodName::MonteCarlo => {
                let m = self.model().map_err(err)?;
                let steps = self.steps(&m);
                let seed = derive_seed(self.cfg.seed, self.t.to_bits());
                match &m {
                    Model::Two(m) => m.monte_carlo(&s, self.cfg.n_traj, seed, steps),
                    Model::Four(m) => m.monte_carlo(&s, self.cfg.n_traj, seed, steps),
                }
                .map_err(err)
            }
        }
    }
}

fn error_rows(cfg: &RunConfig, t: f64, msg: &str) -> Vec<Row> {
    cfg.methods
        .iter()
        .map(|m| Row {
            gate_time_ns: t,
            method: m.as_str(),
            leakage: None,
            peak_frequency_rad_per_ns: None,
            residual: None,
            statistical_error: None,
            wall_time_ms: None,
            status: format!("error: {msg}"),
        })
        .collect()
}

fn run_point(cfg: &RunConfig, t: f64, cache: &Cache) -> (Vec<Row>, Option<(String, Entry)>) {
    let (gate, fresh) = match prepare(&cfg.gate, t, cache) {
        Ok(v) => v,
        Err(e) => return (error_rows(cfg, t, &e.to_string()), None),
    };
    let mut point = Point { cfg, t, gate, traces: None };
    let residual = point.gate.residual();
    let rows = cfg
        .methods
        .iter()
        .map(|&m| {
            let start = Instant::now();
            let out = point.compute(m);
            let wall = cfg.timing.then(|| (start.elapsed().as_secs_f64() * 1e6).round() / 1e3);
            match out {
                Ok(r) => Row {
                    gate_time_ns: t,
                    method: m.as_str(),
                    leakage: Some(r.probability),
                    peak_frequency_rad_per_ns: r.peak_frequencies.first().copied(),
                    residual,
                    statistical_error: r.error_estimate,
                    wall_time_ms: wall,
                    status: if r.validity_warning { "warning: beyond first-order regime".into() } else { "ok".into() },
                },
                Err(msg) => Row {
                    gate_time_ns: t,
                    method: m.as_str(),
                    leakage: None,
                    peak_frequency_rad_per_ns: None,
                    residual,
                    statistical_error: None,
                    wall_time_ms: wall,
                    status: if msg.starts_with("unsupported") { msg } else { format!("error: {msg}") },
                },
            }
        })
        .collect();
    (rows, fresh)
}

/// Evaluates every sweep point (in parallel) and returns rows sorted by gate
/// time and then by the requested method order.
pub fn run(cfg: &RunConfig, cache: &mut Cache) -> Vec<Row> {
    let shared: &Cache = cache;
    let results: Vec<(Vec<Row>, Option<(String, Entry)>)> =
        cfg.gate_times_ns.par_iter().map(|&t| run_point(cfg, t, shared)).collect();
    let mut rows = Vec::new();
    for (r, fresh) in results {
        rows.extend(r);
        if let Some((k, e)) = fresh {
            cache.insert(k, e);
        }
    }
    let order = |m: &str| cfg.methods.iter().position(|x| x.as_str() == m).unwrap_or(usize::MAX);
    rows.sort_by(|a, b| a.gate_time_ns.total_cmp(&b.gate_time_ns).then(order(a.method).cmp(&order(b.method))));
    rows
}
