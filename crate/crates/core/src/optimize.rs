//! Small-dimensional optimizers: Nelder–Mead for derivative-free polishing
//! and Levenberg–Marquardt for weighted least squares.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Stop when every vertex lies within `xtol` of the best one...
    pub xtol: f64,
    /// ...and the objective spread is below `ftol`.
    pub ftol: f64,
    /// Initial simplex edge along each coordinate.
    pub step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iter: 2000,
            xtol: 1e-8,
            ftol: 1e-12,
            step: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Standard Nelder–Mead (reflection 1, expansion 2, contraction ½,
/// shrink ½). Non-finite objective values are treated as +∞, so a
/// constraint can be imposed by returning `f64::INFINITY`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = (values[n] - values[0]).abs();
        let size = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if size <= opts.xtol && (spread <= opts.ftol || !spread.is_finite() && size == 0.0) {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(-0.5);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            for (x, b) in simplex[i].iter_mut().zip(&best) {
                *x = b + 0.5 * (*x - b);
            }
            values[i] = eval(&simplex[i]);
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        f: values[best],
        iterations,
        converged,
    }
}

/// Weighted least-squares model. Residuals are expected to be already
/// divided by their standard errors.
pub trait LeastSquaresProblem {
    fn n_params(&self) -> usize;

    fn residuals(&self, x: &[f64]) -> Vec<f64>;

    /// Residuals and their Jacobian (rows = residuals, columns = parameters).
    fn residuals_and_jacobian(&self, x: &[f64]) -> (Vec<f64>, DMatrix<f64>);

    /// Map a trial point back into the feasible set.
    fn project(&self, _x: &mut [f64]) {}
}

#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative χ² change below which an accepted step ends the fit.
    pub rel_tol: f64,
    pub lambda0: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iter: 500,
            rel_tol: 1e-10,
            lambda0: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub x: Vec<f64>,
    pub chi2: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(JᵀJ)⁻¹` at the solution, when invertible.
    pub covariance: Option<DMatrix<f64>>,
}

fn chi2_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Levenberg–Marquardt with Marquardt's diagonal scaling.
pub fn levenberg_marquardt<P: LeastSquaresProblem>(
    problem: &P,
    x0: &[f64],
    opts: &LmOptions,
) -> LmResult {
    let n = problem.n_params();
    let mut x = x0.to_vec();
    problem.project(&mut x);
    let (mut r, mut j) = problem.residuals_and_jacobian(&x);
    let mut chi2 = chi2_of(&r);
    let mut lambda = opts.lambda0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        if chi2 <= f64::MIN_POSITIVE {
            converged = true;
            break;
        }
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            problem.project(&mut trial);
            let rt = problem.residuals(&trial);
            let chi2_t = chi2_of(&rt);
            if chi2_t.is_finite() && chi2_t <= chi2 {
                let rel = (chi2 - chi2_t) / chi2.max(f64::MIN_POSITIVE);
                x = trial;
                (r, j) = problem.residuals_and_jacobian(&x);
                chi2 = chi2_of(&r);
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel < opts.rel_tol {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged {
            break;
        }
        if !accepted {
            // No downhill step at any damping: already at a minimum to
            // working precision.
            converged = lambda > 1e10;
            break;
        }
    }

    let covariance = (j.transpose() * &j).try_inverse();
    LmResult {
        x,
        chi2,
        iterations,
        converged,
        covariance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            max_iter: 10_000,
            xtol: 1e-10,
            ftol: 1e-20,
            step: 0.5,
        };
        let m = nelder_mead(f, &[-1.2, 1.0], &opts);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn nelder_mead_respects_infinite_walls() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::INFINITY } else { (x[0] + 1.0).powi(2) };
        let m = nelder_mead(f, &[1.0], &NelderMeadOptions::default());
        assert!(m.x[0] >= 0.0 && m.x[0] < 1e-6);
    }

    struct Exp {
        t: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquaresProblem for Exp {
        fn n_params(&self) -> usize {
            2
        }
        fn residuals(&self, x: &[f64]) -> Vec<f64> {
            self.t
                .iter()
                .zip(&self.y)
                .map(|(t, y)| x[0] * (-x[1] * t).exp() - y)
                .collect()
        }
        fn residuals_and_jacobian(&self, x: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
            let r = self.residuals(x);
            let j = DMatrix::from_fn(self.t.len(), 2, |i, k| {
                let e = (-x[1] * self.t[i]).exp();
                if k == 0 {
                    e
                } else {
                    -x[0] * self.t[i] * e
                }
            });
            (r, j)
        }
    }

    #[test]
    fn lm_recovers_exponential() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let y = t.iter().map(|t| 2.5 * (-1.3 * t).exp()).collect();
        let p = Exp { t, y };
        let r = levenberg_marquardt(&p, &[1.0, 0.5], &LmOptions::default());
        assert!(r.converged);
        assert!((r.x[0] - 2.5).abs() < 1e-8 && (r.x[1] - 1.3).abs() < 1e-8);
        assert!(r.covariance.is_some());
    }
}
