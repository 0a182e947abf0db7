//! Quadrature: adaptive Gauss–Kronrod for smooth integrands, and Filon-type
//! rules for sampled signals against `e^{iωt}`.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::linalg::{c, C64, I};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 0.0, max_intervals: 20_000 }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Globally adaptive 15-point Gauss–Kronrod quadrature of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_breaks(f, &[a, b], opts)
}

/// Like [`integrate`], with the range pre-split at the sorted `breaks`
/// (first and last entries are the limits).
pub fn integrate_breaks<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], opts: QuadOptions) -> Result<QuadResult> {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (value, error) = gk15(&mut f, w[0], w[1]);
        evaluations += 15;
        total += value;
        total_err += error;
        heap.push(Interval { a: w[0], b: w[1], value, error });
    }
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target {
            return Ok(QuadResult { value: total, error: total_err, evaluations });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature { estimate: total, error: total_err });
        }
        let Some(worst) = heap.pop() else {
            return Ok(QuadResult { value: total, error: total_err, evaluations });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval too small to split further
            return Err(Error::Quadrature { estimate: total, error: total_err });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Interval { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Interval { a: mid, b: worst.b, value: v2, error: e2 });
        if heap.len() % 64 == 0 {
            // resum to shed accumulated cancellation
            total = heap.iter().map(|i| i.value).sum();
            total_err = heap.iter().map(|i| i.error).sum();
        }
    }
}

/// Composite Simpson rule on a uniform grid. An odd number of intervals is
/// closed with a quadratic through the last three samples.
pub fn simpson(dt: f64, values: &[f64]) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * dt * (values[0] + values[1]),
        _ => {
            let intervals = n - 1;
            let even = intervals - intervals % 2;
            let mut sum = 0.0;
            for k in (0..even).step_by(2) {
                sum += values[k] + 4.0 * values[k + 1] + values[k + 2];
            }
            let mut total = sum * dt / 3.0;
            if intervals % 2 == 1 {
                let (fm, f0, fp) = (values[n - 3], values[n - 2], values[n - 1]);
                total += dt * (-fm + 8.0 * f0 + 5.0 * fp) / 12.0;
            }
            total
        }
    }
}

/// `∫_{u0}^{u1} s^k e^{iωs} ds` for `k = 0, 1, 2`.
fn oscillatory_moments(omega: f64, u0: f64, u1: f64) -> [C64; 3] {
    let reach = omega.abs() * u0.abs().max(u1.abs());
    if reach <= 0.5 {
        let mut out = [C64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut coeff = c(1.0, 0.0);
            let mut sum = c(0.0, 0.0);
            for n in 0..40 {
                let p = (n + k + 1) as i32;
                let term = coeff * ((u1.powi(p) - u0.powi(p)) / p as f64);
                sum += term;
                let bound = coeff.norm() * u0.abs().max(u1.abs()).powi(p);
                if bound <= 1e-18 * sum.norm().max(1e-300) && n > 2 {
                    break;
                }
                coeff *= I * omega / (n + 1) as f64;
            }
            *slot = sum;
        }
        out
    } else {
        let iw = I * omega;
        let w2 = omega * omega;
        let anti = |s: f64| -> [C64; 3] {
            let e = (I * omega * s).exp();
            [
                e / iw,
                e * (s / iw + 1.0 / w2),
                e * (s * s / iw + 2.0 * s / w2 - 2.0 / (iw * w2)),
            ]
        };
        let g1 = anti(u1);
        let g0 = anti(u0);
        [g1[0] - g0[0], g1[1] - g0[1], g1[2] - g0[2]]
    }
}

/// Finite-time Fourier integral `∫ e^{iωt} f(t) dt` of a signal sampled at
/// `t0 + k·dt`, exact for piecewise-quadratic interpolants.
///
/// Accuracy is set by the sampling of `f` only, not by `ω·dt`.
pub fn fourier_sampled(t0: f64, dt: f64, values: &[C64], omega: f64) -> C64 {
    let n = values.len();
    if n < 2 {
        return c(0.0, 0.0);
    }
    if n == 2 {
        // linear interpolant over one interval
        let m = oscillatory_moments(omega, 0.0, dt);
        let slope = (values[1] - values[0]) / dt;
        return (I * omega * t0).exp() * (values[0] * m[0] + slope * m[1]);
    }
    let h = dt;
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let m = oscillatory_moments(omega, -h, h);
    let step = (I * omega * 2.0 * h).exp();
    let mut phase = (I * omega * (t0 + h)).exp();
    let mut sum = c(0.0, 0.0);
    for (panel, k) in (0..even).step_by(2).enumerate() {
        if panel % 512 == 0 {
            phase = (I * omega * (t0 + (k + 1) as f64 * h)).exp();
        }
        let (fm, f0, fp) = (values[k], values[k + 1], values[k + 2]);
        let b = (fp - fm) / (2.0 * h);
        let q = (fp - 2.0 * f0 + fm) / (2.0 * h * h);
        sum += phase * (f0 * m[0] + b * m[1] + q * m[2]);
        phase *= step;
    }
    if intervals % 2 == 1 {
        let (fm, f0, fp) = (values[n - 3], values[n - 2], values[n - 1]);
        let b = (fp - fm) / (2.0 * h);
        let q = (fp - 2.0 * f0 + fm) / (2.0 * h * h);
        let mt = oscillatory_moments(omega, 0.0, h);
        let center = t0 + (n - 2) as f64 * h;
        sum += (I * omega * center).exp() * (f0 * mt[0] + b * mt[1] + q * mt[2]);
    }
    sum
}
