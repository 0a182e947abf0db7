use std::f64::consts::PI;

use transmon_leakage::noise::*;

/// Ensemble-averaged periodogram over `n` seeded trajectories.
fn mean_periodogram(s: &SpectralDensity, duration: f64, dt: f64, n: u64) -> Vec<(f64, f64)> {
    let mut acc: Vec<(f64, f64)> = Vec::new();
    for k in 0..n {
        let traj = synthesize_trajectory(s, duration, dt, derive_seed(42, k)).unwrap();
        let p = periodogram(&traj);
        if acc.is_empty() {
            acc = p.iter().map(|&(w, _)| (w, 0.0)).collect();
        }
        for (a, (_, v)) in acc.iter_mut().zip(p) {
            a.1 += v / n as f64;
        }
    }
    acc
}

#[test]
fn white_noise_periodogram_is_flat() {
    let s0 = 2e-3;
    let s = SpectralDensity::white(s0).unwrap();
    let p = mean_periodogram(&s, 200.0, 0.1, 400);
    let positive: Vec<f64> = p.iter().filter(|(w, _)| *w > 0.0).map(|(_, v)| *v).collect();
    let mean = positive.iter().sum::<f64>() / positive.len() as f64;
    assert!((mean / s0 - 1.0).abs() < 0.05, "band mean {mean} vs {s0}");
    // banded averages, each over ~50 bins
    for chunk in positive.chunks(50) {
        let m = chunk.iter().sum::<f64>() / chunk.len() as f64;
        assert!((m / s0 - 1.0).abs() < 0.1, "band {m} vs {s0}");
    }
}

#[test]
fn one_over_f_periodogram_has_unit_slope() {
    let s = SpectralDensity::one_over_f_with_cutoffs(1e-3, 1e7, 5e9).unwrap();
    let p = mean_periodogram(&s, 2000.0, 0.05, 200);
    let w_lo = 2.0 * PI * 2e7 * 1e-9;
    let w_hi = 2.0 * PI * 2e9 * 1e-9;
    let pts: Vec<(f64, f64)> =
        p.iter().filter(|(w, v)| *w > w_lo && *w < w_hi && *v > 0.0).map(|&(w, v)| (w.ln(), v.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!((slope + 1.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn trajectories_are_reproducible() {
    let s = SpectralDensity::white(1e-3).unwrap();
    let a = synthesize_trajectory(&s, 50.0, 0.1, 7).unwrap();
    let b = synthesize_trajectory(&s, 50.0, 0.1, 7).unwrap();
    let c = synthesize_trajectory(&s, 50.0, 0.1, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.samples, c.samples);
}

#[test]
fn unresolved_band_is_rejected() {
    let s = SpectralDensity::one_over_f(1e-3).unwrap();
    assert!(matches!(synthesize_trajectory(&s, 10.0, 0.1, 1), Err(transmon_leakage::Error::Unresolved { .. })));
}
