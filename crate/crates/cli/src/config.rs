//! Config file layer, flag overrides and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cli::{Figure, Format, MethodName, NoiseKind, RunArgs};
use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateKind {
    CzRapid,
    CzAdiabatic,
    Not,
}

impl GateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GateKind::CzRapid => "cz-rapid",
            GateKind::CzAdiabatic => "cz-adiabatic",
            GateKind::Not => "not",
        }
    }
}

/// Contents of a config file; every key is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub gate: Option<GateKind>,
    pub noise: Option<NoiseKind>,
    pub g_mhz: Option<f64>,
    pub delta0_ghz: Option<f64>,
    pub f01_ghz: Option<f64>,
    pub eta_mhz: Option<f64>,
    pub gate_ns: Option<f64>,
    pub sweep_ns: Option<String>,
    pub tphi1_us: Option<f64>,
    pub tphi2_us: Option<f64>,
    pub fmin_hz: Option<f64>,
    pub fmax_hz: Option<f64>,
    pub methods: Option<Vec<MethodName>>,
    pub steps: Option<usize>,
    pub n_traj: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub cache: Option<PathBuf>,
    pub no_cache: Option<bool>,
    pub timing: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))
    }

    /// Flags take precedence over file values.
    fn overlay(self, a: &RunArgs) -> Self {
        Self {
            gate: self.gate,
            noise: a.noise.or(self.noise),
            g_mhz: a.g_mhz.or(self.g_mhz),
            delta0_ghz: a.delta0_ghz.or(self.delta0_ghz),
            f01_ghz: a.f01_ghz.or(self.f01_ghz),
            eta_mhz: a.eta_mhz.or(self.eta_mhz),
            gate_ns: a.gate_ns.or(self.gate_ns),
            sweep_ns: a.sweep_ns.clone().or(self.sweep_ns),
            tphi1_us: a.tphi1_us.or(self.tphi1_us),
            tphi2_us: a.tphi2_us.or(self.tphi2_us),
            fmin_hz: a.fmin_hz.or(self.fmin_hz),
            fmax_hz: a.fmax_hz.or(self.fmax_hz),
            methods: a.methods.clone().or(self.methods),
            steps: a.steps.or(self.steps),
            n_traj: a.n_traj.or(self.n_traj),
            seed: a.seed.or(self.seed),
            output: a.output.clone().or(self.output),
            format: a.format.or(self.format),
            cache: a.cache.clone().or(self.cache),
            no_cache: if a.no_cache { Some(true) } else { self.no_cache },
            timing: if a.timing { Some(true) } else { self.timing },
        }
    }
}

/// Physical gate parameters in lab units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "gate", rename_all = "kebab-case")]
pub enum GateParams {
    CzRapid { g_mhz: Option<f64> },
    CzAdiabatic { g_mhz: f64, delta0_ghz: f64 },
    Not { f01_ghz: f64, eta_mhz: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "noise", rename_all = "lowercase")]
pub enum NoiseParams {
    White { tphi1_us: f64 },
    Oneoverf { tphi2_us: f64, fmin_hz: f64, fmax_hz: f64 },
}

/// Fully resolved run; echoed into JSON-lines output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub gate: GateParams,
    #[serde(flatten)]
    pub noise: NoiseParams,
    pub gate_times_ns: Vec<f64>,
    pub methods: Vec<MethodName>,
    pub steps: Option<usize>,
    pub n_traj: usize,
    pub seed: u64,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub cache: Option<PathBuf>,
    #[serde(skip)]
    pub timing: bool,
}

pub const DEFAULT_CACHE: &str = ".tleak-cache.json";
const DEFAULT_N_TRAJ: usize = 1000;
const DEFAULT_FMIN_HZ: f64 = 1.0;
const DEFAULT_FMAX_HZ: f64 = 100e9;

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

fn positive(name: &str, v: Option<f64>) -> Result<Option<f64>, UsageError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => usage(format!("--{name} must be positive, got {x}")),
        other => Ok(other),
    }
}

/// Parses `start:stop:step` into gate times `start + k·step ≤ stop`.
pub fn parse_sweep(text: &str) -> Result<Vec<f64>, UsageError> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return usage(format!("sweep '{text}' must be start:stop:step"));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| UsageError(format!("sweep '{text}': '{s}' is not a number")));
    let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return usage(format!("sweep '{text}' must be finite"));
    }
    if !(start < stop) {
        return usage(format!("sweep '{text}': start must be below stop"));
    }
    if !(step > 0.0) {
        return usage(format!("sweep '{text}': step must be positive"));
    }
    if !(start > 0.0) {
        return usage(format!("sweep '{text}': gate times must be positive"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return usage(format!("sweep '{text}' has too many points"));
    }
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

fn methods_or_default(m: Option<Vec<MethodName>>) -> Result<Vec<MethodName>, UsageError> {
    let mut m = m.unwrap_or_else(|| vec![MethodName::ClosedForm, MethodName::ExactIntegral]);
    if m.is_empty() {
        return usage("at least one method is required");
    }
    let mut seen = Vec::new();
    m.retain(|x| {
        let fresh = !seen.contains(x);
        seen.push(*x);
        fresh
    });
    Ok(m)
}

/// Figure presets expressed as config files.
pub fn figure_preset(which: Figure) -> FileConfig {
    let base = FileConfig::default();
    match which {
        Figure::Fig2b | Figure::Fig2c => {
            let white = which == Figure::Fig2b;
            FileConfig {
                gate: Some(GateKind::CzAdiabatic),
                g_mhz: Some(50.0),
                delta0_ghz: Some(1.0),
                sweep_ns: Some("15:100:5".into()),
                noise: Some(if white { NoiseKind::White } else { NoiseKind::Oneoverf }),
                tphi1_us: white.then_some(100.0),
                tphi2_us: (!white).then_some(1.0),
                methods: Some(if white {
                    vec![MethodName::ClosedForm, MethodName::ExactIntegral, MethodName::MasterEq]
                } else {
                    vec![MethodName::ClosedForm, MethodName::ExactIntegral]
                }),
                ..base
            }
        }
        Figure::Fig3b | Figure::Fig3c => {
            let white = which == Figure::Fig3b;
            FileConfig {
                gate: Some(GateKind::Not),
                f01_ghz: Some(6.0),
                eta_mhz: Some(260.0),
                sweep_ns: Some("10:40:2".into()),
                noise: Some(if white { NoiseKind::White } else { NoiseKind::Oneoverf }),
                tphi1_us: white.then_some(100.0),
                tphi2_us: (!white).then_some(1.0),
                methods: Some(if white {
                    vec![MethodName::ClosedForm, MethodName::MasterEq]
                } else {
                    vec![MethodName::ClosedForm, MethodName::ExactIntegral]
                }),
                ..base
            }
        }
    }
}

/// Merges `base` (preset or empty), the config file named by the flags, then
/// the flags, and validates the result for `gate`.
pub fn resolve(gate: GateKind, base: FileConfig, args: &RunArgs) -> Result<RunConfig, UsageError> {
    let mut layered = base;
    if let Some(path) = &args.config {
        let file = FileConfig::load(path)?;
        if let (Some(a), Some(b)) = (layered.gate, file.gate) {
            if a != b {
                return usage(format!("config file is for {}, not {}", b.as_str(), a.as_str()));
            }
        }
        layered = merge(layered, file);
    }
    if let Some(g) = layered.gate {
        if g != gate {
            return usage(format!("config file is for {}, not {}", g.as_str(), gate.as_str()));
        }
    }
    let c = layered.overlay(args);

    let inapplicable = |name: &str, present: bool| -> Result<(), UsageError> {
        if present {
            usage(format!("--{name} does not apply to {}", gate.as_str()))
        } else {
            Ok(())
        }
    };
    let g_mhz = positive("g-mhz", c.g_mhz)?;
    let delta0 = positive("delta0-ghz", c.delta0_ghz)?;
    let f01 = positive("f01-ghz", c.f01_ghz)?;
    let eta = positive("eta-mhz", c.eta_mhz)?;
    let gate_ns = positive("gate-ns", c.gate_ns)?;

    let times = match (gate_ns, &c.sweep_ns) {
        (Some(_), Some(_)) => return usage("give either --gate-ns or --sweep-ns, not both"),
        (Some(t), None) => Some(vec![t]),
        (None, Some(s)) => Some(parse_sweep(s)?),
        (None, None) => None,
    };

    let (params, gate_times_ns) = match gate {
        GateKind::CzRapid => {
            inapplicable("delta0-ghz", delta0.is_some())?;
            inapplicable("f01-ghz", f01.is_some())?;
            inapplicable("eta-mhz", eta.is_some())?;
            match (g_mhz, times) {
                (Some(_), Some(_)) => return usage("cz-rapid fixes T = π/g: give --g-mhz or a gate time, not both"),
                (g, Some(t)) => (GateParams::CzRapid { g_mhz: g }, t),
                (g, None) => {
                    let g = g.unwrap_or(50.0);
                    (GateParams::CzRapid { g_mhz: Some(g) }, vec![0.5e3 / g])
                }
            }
        }
        GateKind::CzAdiabatic => {
            inapplicable("f01-ghz", f01.is_some())?;
            inapplicable("eta-mhz", eta.is_some())?;
            let Some(t) = times else { return usage("cz-adiabatic needs --gate-ns or --sweep-ns") };
            (GateParams::CzAdiabatic { g_mhz: g_mhz.unwrap_or(50.0), delta0_ghz: delta0.unwrap_or(1.0) }, t)
        }
        GateKind::Not => {
            inapplicable("g-mhz", g_mhz.is_some())?;
            inapplicable("delta0-ghz", delta0.is_some())?;
            let Some(t) = times else { return usage("not needs --gate-ns or --sweep-ns") };
            (GateParams::Not { f01_ghz: f01.unwrap_or(6.0), eta_mhz: eta.unwrap_or(260.0) }, t)
        }
    };

    let fmin = positive("fmin-hz", c.fmin_hz)?;
    let fmax = positive("fmax-hz", c.fmax_hz)?;
    let noise = match c.noise {
        None => return usage("--noise white|oneoverf is required"),
        Some(NoiseKind::White) => {
            if c.tphi2_us.is_some() || fmin.is_some() || fmax.is_some() {
                return usage("--tphi2-us, --fmin-hz and --fmax-hz apply to --noise oneoverf only");
            }
            let Some(t) = positive("tphi1-us", c.tphi1_us)? else { return usage("--noise white needs --tphi1-us") };
            NoiseParams::White { tphi1_us: t }
        }
        Some(NoiseKind::Oneoverf) => {
            if c.tphi1_us.is_some() {
                return usage("--tphi1-us applies to --noise white only");
            }
            let Some(t) = positive("tphi2-us", c.tphi2_us)? else { return usage("--noise oneoverf needs --tphi2-us") };
            let (lo, hi) = (fmin.unwrap_or(DEFAULT_FMIN_HZ), fmax.unwrap_or(DEFAULT_FMAX_HZ));
            if !(lo < hi) {
                return usage("--fmin-hz must be below --fmax-hz");
            }
            NoiseParams::Oneoverf { tphi2_us: t, fmin_hz: lo, fmax_hz: hi }
        }
    };

    let methods = methods_or_default(c.methods)?;
    let n_traj = c.n_traj.unwrap_or(DEFAULT_N_TRAJ);
    if methods.contains(&MethodName::MonteCarlo) && n_traj < 100 {
        return usage("--n-traj must be at least 100");
    }
    if let Some(s) = c.steps {
        if s < 1000 {
            return usage("--steps must be at least 1000");
        }
    }
    let cache = if c.no_cache.unwrap_or(false) { None } else { Some(c.cache.unwrap_or_else(|| DEFAULT_CACHE.into())) };
    Ok(RunConfig {
        gate: params,
        noise,
        gate_times_ns,
        methods,
        steps: c.steps,
        n_traj,
        seed: c.seed.unwrap_or(0),
        output: c.output,
        format: c.format.unwrap_or(Format::Csv),
        cache,
        timing: c.timing.unwrap_or(false),
    })
}

/// `top` values win over `bottom`.
fn merge(bottom: FileConfig, top: FileConfig) -> FileConfig {
    FileConfig {
        gate: top.gate.or(bottom.gate),
        noise: top.noise.or(bottom.noise),
        g_mhz: top.g_mhz.or(bottom.g_mhz),
        delta0_ghz: top.delta0_ghz.or(bottom.delta0_ghz),
        f01_ghz: top.f01_ghz.or(bottom.f01_ghz),
        eta_mhz: top.eta_mhz.or(bottom.eta_mhz),
        gate_ns: top.gate_ns.or(bottom.gate_ns),
        sweep_ns: top.sweep_ns.or(bottom.sweep_ns),
        tphi1_us: top.tphi1_us.or(bottom.tphi1_us),
        tphi2_us: top.tphi2_us.or(bottom.tphi2_us),
        fmin_hz: top.fmin_hz.or(bottom.fmin_hz),
        fmax_hz: top.fmax_hz.or(bottom.fmax_hz),
        methods: top.methods.or(bottom.methods),
        steps: top.steps.or(bottom.steps),
        n_traj: top.n_traj.or(bottom.n_traj),
        seed: top.seed.or(bottom.seed),
        output: top.output.or(bottom.output),
        format: top.format.or(bottom.format),
        cache: top.cache.or(bottom.cache),
        no_cache: top.no_cache.or(bottom.no_cache),
        timing: top.timing.or(bottom.timing),
    }
}
