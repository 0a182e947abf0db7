//! `tleak`: dephasing-induced leakage of transmon gates from the command line.

mod cache;
mod calibrate;
mod cli;
mod config;
mod output;
mod run;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use cli::{Cli, Command};
use config::{figure_preset, resolve, FileConfig, GateKind};

/// Bad invocation; exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERIC: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_NUMERIC)
            }
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    let (gate, base, args) = match cli.command {
        Command::CzRapid(a) => (GateKind::CzRapid, FileConfig::default(), a),
        Command::CzAdiabatic(a) => (GateKind::CzAdiabatic, FileConfig::default(), a),
        Command::Not(a) => (GateKind::Not, FileConfig::default(), a),
        Command::Fig { which, args } => {
            let preset = figure_preset(which);
            (preset.gate.expect("presets name their gate"), preset, args)
        }
        Command::Calibrate(a) => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            calibrate::run(&a, &mut lock)?;
            return Ok(ExitCode::SUCCESS);
        }
    };
    let cfg = resolve(gate, base, &args)?;
    let mut cache = cache::Cache::open(cfg.cache.as_deref());
    let rows = run::run(&cfg, &mut cache);
    if let Err(e) = cache.save() {
        eprintln!("warning: could not write cache: {e}");
    }
    let mut sink: Box<dyn Write> = match &cfg.output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| anyhow::anyhow!("cannot create {}: {e}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    output::write_rows(&mut *sink, cfg.format, &cfg, &rows)?;
    for r in rows.iter().filter(|r| !r.ok()) {
        eprintln!("T = {} ns, {}: {}", r.gate_time_ns, r.method, r.status);
    }
    if rows.iter().all(|r| !r.ok()) {
        return Ok(ExitCode::from(EXIT_NUMERIC));
    }
    Ok(ExitCode::SUCCESS)
}
