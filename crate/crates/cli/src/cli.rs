use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Dephasing-induced leakage of transmon gates.
#[derive(Debug, Parser)]
#[command(name = "tleak", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rapid controlled-phase gate (Δ = 0, T = π/g).
    CzRapid(RunArgs),
    /// Adiabatic controlled-phase gate with optimised θ(t).
    CzAdiabatic(RunArgs),
    /// DRAG NOT gate on a four-level transmon.
    Not(RunArgs),
    /// Noise calibration report: S₀/S₁, dephasing exponents, 1/f log factor.
    Calibrate(CalibrateArgs),
    /// Dataset behind one of the figure panels; flags override the preset.
    Fig {
        which: Figure,
        #[command(flatten)]
        args: RunArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    #[value(name = "2b")]
    Fig2b,
    #[value(name = "2c")]
    Fig2c,
    #[value(name = "3b")]
    Fig3b,
    #[value(name = "3c")]
    Fig3c,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    White,
    Oneoverf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    ClosedForm,
    ExactIntegral,
    Peaked,
    MasterEq,
    MonteCarlo,
}

impl MethodName {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodName::ClosedForm => "closed-form",
            MethodName::ExactIntegral => "exact-integral",
            MethodName::Peaked => "peaked",
            MethodName::MasterEq => "master-eq",
            MethodName::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

/// Flags shared by the gate subcommands. Every flag mirrors a key of the
/// JSON config file; flags win over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON config file (see docs/config.schema.json).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub noise: Option<NoiseKind>,
    /// Coupling g/2π in MHz.
    #[arg(long)]
    pub g_mhz: Option<f64>,
    /// Idle detuning Δ(0)/2π in GHz.
    #[arg(long)]
    pub delta0_ghz: Option<f64>,
    /// Qubit frequency ω₀₁/2π in GHz.
    #[arg(long)]
    pub f01_ghz: Option<f64>,
    /// Anharmonicity η/2π in MHz.
    #[arg(long)]
    pub eta_mhz: Option<f64>,
    /// Single gate time in ns.
    #[arg(long)]
    pub gate_ns: Option<f64>,
    /// Gate-time sweep start:stop:step in ns.
    #[arg(long)]
    pub sweep_ns: Option<String>,
    /// Single-qubit white-noise dephasing time T_φ⁽¹⁾ in μs.
    #[arg(long)]
    pub tphi1_us: Option<f64>,
    /// Single-qubit 1/f dephasing time T_φ⁽²⁾ in μs.
    #[arg(long)]
    pub tphi2_us: Option<f64>,
    /// Low 1/f cutoff in Hz.
    #[arg(long)]
    pub fmin_hz: Option<f64>,
    /// High 1/f cutoff in Hz.
    #[arg(long)]
    pub fmax_hz: Option<f64>,
    /// Comma-separated methods.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<MethodName>>,
    /// Integrator steps for amplitudes and Monte Carlo.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Monte Carlo trajectories.
    #[arg(long)]
    pub n_traj: Option<usize>,
    /// Monte Carlo master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output if absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Optimizer cache file.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Do not read or write the optimizer cache.
    #[arg(long)]
    pub no_cache: bool,
    /// Fill the wall_time_ms column (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("tphi").required(true).args(["tphi1_us", "tphi2_us"])))]
pub struct CalibrateArgs {
    /// White-noise dephasing time T_φ⁽¹⁾ in μs.
    #[arg(long)]
    pub tphi1_us: Option<f64>,
    /// 1/f dephasing time T_φ⁽²⁾ in μs.
    #[arg(long)]
    pub tphi2_us: Option<f64>,
    /// Times in ns at which to report the dephasing exponent.
    #[arg(long, value_delimiter = ',')]
    pub at_ns: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub fmin_hz: f64,
    #[arg(long, default_value_t = 100e9)]
    pub fmax_hz: f64,
}
