//! Nelder–Mead simplex minimisation with optional box constraints.

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    /// Convergence when both the objective spread and the simplex diameter
    /// (in scaled coordinates) fall below this value.
    pub spread_tol: f64,
    pub max_evaluations: usize,
    /// Initial step per coordinate.
    pub initial_step: Vec<f64>,
    /// Optional per-coordinate `(lower, upper)` bounds; trial points are clamped.
    pub bounds: Option<Vec<(f64, f64)>>,
    /// Stop as soon as the best value is at or below this.
    pub target: Option<f64>,
}

impl NelderMeadOptions {
    pub fn new(initial_step: Vec<f64>) -> Self {
        Self { spread_tol: 1e-10, max_evaluations: 2000, initial_step, bounds: None, target: None }
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = Some(bounds);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn clamp(x: &mut [f64], bounds: &Option<Vec<(f64, f64)>>) {
    if let Some(b) = bounds {
        for (xi, (lo, hi)) in x.iter_mut().zip(b) {
            *xi = xi.clamp(*lo, *hi);
        }
    }
}

pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let n = x0.len();
    let scale: Vec<f64> = opts.initial_step.iter().map(|s| s.abs().max(f64::MIN_POSITIVE)).collect();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| -> f64 {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut start = x0.to_vec();
    clamp(&mut start, &opts.bounds);
    let mut simplex: Vec<Vec<f64>> = vec![start.clone()];
    for i in 0..n {
        let mut p = start.clone();
        p[i] += opts.initial_step[i];
        if let Some(b) = &opts.bounds {
            if p[i] > b[i].1 {
                p[i] = start[i] - opts.initial_step[i];
            }
        }
        clamp(&mut p, &opts.bounds);
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evaluations)).collect();

    let mut converged = false;
    while evaluations < opts.max_evaluations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let f_spread = (values[n] - values[0]).abs();
        let x_spread = simplex[1..]
            .iter()
            .map(|p| p.iter().zip(&simplex[0]).zip(&scale).map(|((a, b), s)| ((a - b) / s).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if f_spread <= opts.spread_tol && x_spread <= opts.spread_tol {
            converged = true;
            break;
        }
        if opts.target.is_some_and(|t| values[0] <= t) {
            converged = true;
            break;
        }
        // objective already at the floating-point floor
        if values[0] == 0.0 && f_spread == 0.0 {
            converged = true;
            break;
        }

        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = (0..n).map(|j| centroid[j] + t * (simplex[n][j] - centroid[j])).collect();
            clamp(&mut p, &opts.bounds);
            p
        };

        let reflected = along(-1.0);
        let fr = eval(&reflected, &mut evaluations);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = eval(&expanded, &mut evaluations);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let p = along(-0.5);
            let v = eval(&p, &mut evaluations);
            (p, v)
        } else {
            let p = along(0.5);
            let v = eval(&p, &mut evaluations);
            (p, v)
        };
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        // shrink towards the best vertex
        for i in 1..=n {
            let p: Vec<f64> = (0..n).map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j])).collect();
            values[i] = eval(&p, &mut evaluations);
            simplex[i] = p;
        }
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    Minimum { x: simplex[best].clone(), value: values[best], evaluations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let mut opts = NelderMeadOptions::new(vec![0.5, 0.5]);
        opts.max_evaluations = 5000;
        let m = nelder_mead(f, &[-1.2, 1.0], &opts);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn respects_bounds() {
        let f = |x: &[f64]| (x[0] - 5.0).powi(2);
        let opts = NelderMeadOptions::new(vec![0.1]).with_bounds(vec![(0.0, 1.0)]);
        let m = nelder_mead(f, &[0.5], &opts);
        assert!((m.x[0] - 1.0).abs() < 1e-8);
    }
}
