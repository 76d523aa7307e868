//! Small dense Levenberg-Marquardt solver with analytic Jacobians and box
//! bounds enforced by projection. The problems here have at most ~9 free
//! parameters and a few thousand residuals, so damped normal equations with
//! a Cholesky solve are the right tool.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A weighted nonlinear least-squares problem.
pub trait LeastSquares {
    fn residual_count(&self) -> usize;
    fn parameter_count(&self) -> usize;
    /// Residuals r_k(p) (already weighted by 1/sigma_k where applicable).
    fn residuals(&self, params: &[f64], out: &mut [f64]);
    /// Jacobian J[k][j] = d r_k / d p_j.
    fn jacobian(&self, params: &[f64], out: &mut DMatrix<f64>);
    /// Inclusive box bounds per parameter.
    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(f64::NEG_INFINITY, f64::INFINITY); self.parameter_count()]
    }
    /// True when residuals carry measurement weights; the covariance is then
    /// reported unscaled instead of being rescaled by the reduced chi-square.
    fn is_weighted(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative cost-reduction tolerance.
    pub ftol: f64,
    /// Relative step-size tolerance.
    pub xtol: f64,
    pub lambda_init: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iterations: 300, ftol: 1e-14, xtol: 1e-12, lambda_init: 1e-3 }
    }
}

#[derive(Debug, Clone)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// Sum of squared residuals at the solution.
    pub cost: f64,
    /// Per-parameter standard errors from the covariance diagonal.
    pub std_errors: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Parameters that ended on a bound.
    pub at_bound: Vec<bool>,
}

impl LmFit {
    /// Correlation coefficient between two parameter estimates.
    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        let d = (self.covariance[(i, i)] * self.covariance[(j, j)]).sqrt();
        if d > 0.0 {
            self.covariance[(i, j)] / d
        } else {
            0.0
        }
    }
}

fn clamp_to_bounds(p: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in p.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Run the damped least-squares iteration from `initial`.
///
/// Returns `Error::NonConvergence` when the iteration cap is reached without
/// meeting the tolerances; the caller can still inspect best-so-far values by
/// loosening `max_iterations`.
pub fn levenberg_marquardt(
    problem: &dyn LeastSquares,
    initial: &[f64],
    opts: &LmOptions,
) -> Result<LmFit> {
    let n = problem.residual_count();
    let m = problem.parameter_count();
    if initial.len() != m {
        return Err(Error::InvalidArgument("initial guess has wrong length".into()));
    }
    if n < m {
        return Err(Error::InvalidArgument(format!(
            "{n} residuals cannot constrain {m} parameters"
        )));
    }
    let bounds = problem.bounds();
    let mut params = initial.to_vec();
    clamp_to_bounds(&mut params, &bounds);

    let mut residuals = vec![0.0; n];
    problem.residuals(&params, &mut residuals);
    let mut cost = sum_sq(&residuals);
    let mut jac = DMatrix::<f64>::zeros(n, m);
    let mut lambda = opts.lambda_init;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..opts.max_iterations {
        iterations = iter + 1;
        problem.jacobian(&params, &mut jac);
        let jt = jac.transpose();
        let mut jtj = &jt * &jac;
        let r_vec = DVector::from_column_slice(&residuals);
        let mut grad = &jt * &r_vec;

        // freeze parameters pinned at a bound with the gradient pointing out
        for j in 0..m {
            let (lo, hi) = bounds[j];
            let scale = params[j].abs().max(1.0);
            let at_lo = (params[j] - lo).abs() <= 1e-14 * scale;
            let at_hi = (hi - params[j]).abs() <= 1e-14 * scale;
            if (at_lo && grad[j] > 0.0) || (at_hi && grad[j] < 0.0) {
                for i in 0..m {
                    jtj[(j, i)] = 0.0;
                    jtj[(i, j)] = 0.0;
                }
                jtj[(j, j)] = 1.0;
                grad[j] = 0.0;
            }
        }

        if grad.amax() <= 1e-300 {
            converged = true;
            break;
        }

        let mut improved = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for d in 0..m {
                let diag = jtj[(d, d)];
                a[(d, d)] = diag + lambda * diag.max(1e-30);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let mut trial: Vec<f64> = params
                .iter()
                .zip(step.iter())
                .map(|(p, s)| p + s)
                .collect();
            clamp_to_bounds(&mut trial, &bounds);

            let mut trial_res = vec![0.0; n];
            problem.residuals(&trial, &mut trial_res);
            let trial_cost = sum_sq(&trial_res);
            if trial_cost.is_finite() && trial_cost < cost {
                let step_norm: f64 = params
                    .iter()
                    .zip(&trial)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let param_norm: f64 = trial.iter().map(|x| x * x).sum::<f64>().sqrt();
                let rel_drop = (cost - trial_cost) / cost.max(1e-300);
                params = trial;
                residuals = trial_res;
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if rel_drop < opts.ftol || step_norm <= opts.xtol * (param_norm + opts.xtol) {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e14 {
                break;
            }
        }
        if converged {
            break;
        }
        if !improved {
            // no downhill step found at any damping: stationary (or stuck)
            converged = cost.is_finite();
            break;
        }
    }

    problem.jacobian(&params, &mut jac);
    let jtj = jac.transpose() * &jac;
    let covariance = covariance_from_jtj(&jtj, cost, n, m, problem.is_weighted());
    let std_errors = (0..m).map(|k| covariance[(k, k)].max(0.0).sqrt()).collect();
    let at_bound = params
        .iter()
        .zip(&bounds)
        .map(|(p, &(lo, hi))| {
            let scale = p.abs().max(1.0);
            (p - lo).abs() <= 1e-12 * scale || (hi - p).abs() <= 1e-12 * scale
        })
        .collect();

    if !converged {
        return Err(Error::NonConvergence { iterations, cost });
    }
    Ok(LmFit { params, cost, std_errors, covariance, iterations, converged, at_bound })
}

fn covariance_from_jtj(
    jtj: &DMatrix<f64>,
    cost: f64,
    n: usize,
    m: usize,
    weighted: bool,
) -> DMatrix<f64> {
    let inv = jtj
        .clone()
        .try_inverse()
        .unwrap_or_else(|| DMatrix::from_element(m, m, f64::INFINITY));
    if weighted || n <= m {
        inv
    } else {
        // unweighted: rescale by the residual variance estimate
        inv * (cost / (n - m) as f64)
    }
}
