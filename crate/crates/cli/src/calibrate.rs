//! `tleak calibrate`: spectral amplitudes implied by measured dephasing times.

use std::io::Write;

use transmon_leakage::noise::{
    dephasing_exponent, oneoverf_from_t2, one_over_f_log_factor, white_from_t1, DephasingCalibration, SpectralDensity,
};
use transmon_leakage::us_to_ns;

use crate::cli::CalibrateArgs;
use crate::UsageError;

pub fn run(args: &CalibrateArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    for &t in &args.at_ns {
        if !(t > 0.0 && t.is_finite()) {
            return Err(UsageError(format!("--at-ns times must be positive, got {t}")).into());
        }
    }
    let spectra = |m: u8| -> anyhow::Result<SpectralDensity> {
        Ok(match (args.tphi1_us, args.tphi2_us) {
            (Some(t1), None) => white_from_t1(&DephasingCalibration::new(us_to_ns(t1), f64::INFINITY, m)?)?,
            (None, Some(t2)) => {
                let s = oneoverf_from_t2(&DephasingCalibration::new(f64::INFINITY, us_to_ns(t2), m)?)?;
                SpectralDensity::one_over_f_with_cutoffs(s.amplitude, args.fmin_hz, args.fmax_hz)?
            }
            _ => return Err(UsageError("give exactly one of --tphi1-us or --tphi2-us".into()).into()),
        })
    };
    let (single, double) = (spectra(1).map_err(as_usage)?, spectra(2).map_err(as_usage)?);
    let white = args.tphi1_us.is_some();
    if white {
        writeln!(out, "noise,white")?;
        writeln!(out, "tphi1_us,{}", args.tphi1_us.unwrap_or_default())?;
        writeln!(out, "s0_single_per_ns,{:e}", single.amplitude)?;
        writeln!(out, "s0_two_qubit_per_ns,{:e}", double.amplitude)?;
    } else {
        writeln!(out, "noise,oneoverf")?;
        writeln!(out, "tphi2_us,{}", args.tphi2_us.unwrap_or_default())?;
        writeln!(out, "fmin_hz,{:e}", args.fmin_hz)?;
        writeln!(out, "fmax_hz,{:e}", args.fmax_hz)?;
        writeln!(out, "s1_single_per_ns2,{:e}", single.amplitude)?;
        writeln!(out, "s1_two_qubit_per_ns2,{:e}", double.amplitude)?;
    }
    if !args.at_ns.is_empty() {
        writeln!(out)?;
        if white {
            writeln!(out, "t_ns,dephasing_exponent")?;
        } else {
            writeln!(out, "t_ns,dephasing_exponent,log_factor")?;
        }
        for &t in &args.at_ns {
            let d = dephasing_exponent(&single, t)?;
            if white {
                writeln!(out, "{t},{d:e}")?;
            } else {
                writeln!(out, "{t},{d:e},{:.6}", one_over_f_log_factor(&single, t)?)?;
            }
        }
    }
    Ok(())
}

fn as_usage(e: anyhow::Error) -> anyhow::Error {
    if e.is::<UsageError>() {
        e
    } else {
        UsageError(e.to_string()).into()
    }
}
