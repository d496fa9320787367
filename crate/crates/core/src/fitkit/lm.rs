//! Box-constrained Levenberg–Marquardt with finite-difference Jacobians.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative cost change and relative step size at which iteration stops.
    pub tol: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LmOptions {
    pub fn unbounded(n: usize) -> Self {
        Self {
            max_iter: 500,
            tol: 1e-12,
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    /// Sum of squared residuals at `x`.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Residual callback: fills `out` and returns `false` when the model cannot
/// be evaluated at `x`.
pub trait Residuals {
    fn len(&self) -> usize;
    fn eval(&self, x: &[f64], out: &mut [f64]) -> bool;
}

impl<F> Residuals for (usize, F)
where
    F: Fn(&[f64], &mut [f64]) -> bool,
{
    fn len(&self) -> usize {
        self.0
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) -> bool {
        (self.1)(x, out)
    }
}

pub fn cost_at<R: Residuals + ?Sized>(problem: &R, x: &[f64]) -> f64 {
    let mut r = vec![0.0; problem.len()];
    if problem.eval(x, &mut r) {
        let c: f64 = r.iter().map(|v| v * v).sum();
        if c.is_finite() {
            return c;
        }
    }
    f64::INFINITY
}

fn clamp(x: &mut [f64], opts: &LmOptions) {
    for (i, v) in x.iter_mut().enumerate() {
        *v = v.clamp(opts.lower[i], opts.upper[i]);
    }
}

fn jacobian<R: Residuals + ?Sized>(problem: &R, x: &[f64], opts: &LmOptions) -> Option<DMatrix<f64>> {
    let m = problem.len();
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let (mut plus, mut minus) = (vec![0.0; m], vec![0.0; m]);
    let mut probe = x.to_vec();
    for j in 0..n {
        let h = 1e-6 * x[j].abs().max(1.0);
        let hi = (x[j] + h).min(opts.upper[j]);
        let lo = (x[j] - h).max(opts.lower[j]);
        probe[j] = hi;
        let ok_hi = problem.eval(&probe, &mut plus);
        probe[j] = lo;
        let ok_lo = problem.eval(&probe, &mut minus);
        probe[j] = x[j];
        if !(ok_hi && ok_lo) || hi == lo {
            return None;
        }
        for i in 0..m {
            jac[(i, j)] = (plus[i] - minus[i]) / (hi - lo);
        }
    }
    Some(jac)
}

/// Minimizes the sum of squared residuals starting from `x0`.
///
/// Steps that leave the box are projected back onto it. A step is accepted
/// only when it lowers the cost, so the returned cost never exceeds the cost
/// at `x0`.
pub fn minimize<R: Residuals + ?Sized>(problem: &R, x0: &[f64], opts: &LmOptions) -> LmOutcome {
    let n = x0.len();
    let m = problem.len();
    let mut x = x0.to_vec();
    clamp(&mut x, opts);
    let mut res = vec![0.0; m];
    if !problem.eval(&x, &mut res) {
        return LmOutcome {
            x,
            cost: f64::INFINITY,
            iterations: 0,
            converged: false,
        };
    }
    let mut cost: f64 = res.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    let mut trial = vec![0.0; n];
    let mut trial_res = vec![0.0; m];

    for iter in 0..opts.max_iter {
        if cost == 0.0 {
            return LmOutcome {
                x,
                cost,
                iterations: iter,
                converged: true,
            };
        }
        let Some(jac) = jacobian(problem, &x, opts) else {
            break;
        };
        let r = DVector::from_column_slice(&res);
        let mut jtj = jac.transpose() * &jac;
        let mut grad = jac.transpose() * &r;
        // Coordinates pinned at a bound with the gradient pushing outward
        // stay fixed for this iteration.
        for j in 0..n {
            let pinned = (x[j] <= opts.lower[j] && grad[j] > 0.0) || (x[j] >= opts.upper[j] && grad[j] < 0.0);
            if pinned {
                jtj.row_mut(j).fill(0.0);
                jtj.column_mut(j).fill(0.0);
                jtj[(j, j)] = 1.0;
                grad[j] = 0.0;
            }
        }

        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for d in 0..n {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            for j in 0..n {
                trial[j] = x[j] + step[j];
            }
            clamp(&mut trial, opts);
            let ok = problem.eval(&trial, &mut trial_res);
            let trial_cost: f64 = if ok {
                trial_res.iter().map(|v| v * v).sum()
            } else {
                f64::INFINITY
            };
            if trial_cost.is_finite() && trial_cost <= cost {
                let step_norm: f64 = x.iter().zip(&trial).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let x_norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let drop = cost - trial_cost;
                x.copy_from_slice(&trial);
                res.copy_from_slice(&trial_res);
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if drop <= opts.tol * cost || step_norm <= opts.tol * (x_norm + opts.tol) {
                    return LmOutcome {
                        x,
                        cost,
                        iterations: iter + 1,
                        converged: true,
                    };
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // Every damped step failed to lower the cost: stationary to
            // machine precision.
            return LmOutcome {
                x,
                cost,
                iterations: iter + 1,
                converged: true,
            };
        }
    }
    LmOutcome {
        x,
        cost,
        iterations: opts.max_iter,
        converged: false,
    }
}
