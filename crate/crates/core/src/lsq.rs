//! Damped Gauss-Newton (Levenberg-Marquardt) for small dense problems.

use nalgebra::{DMatrix, DVector};

/// A residual map `r: R^n -> R^m` with its Jacobian.
pub trait LeastSquares {
    /// Residual vector and `m x n` Jacobian at `p`.
    fn evaluate(&self, p: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>);

    fn residual(&self, p: &DVector<f64>) -> DVector<f64> {
        self.evaluate(p).0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOptions {
    pub max_iters: usize,
    /// Stop once `‖r‖` drops to this value.
    pub abs_tol: f64,
    pub lambda_init: f64,
    pub lambda_down: f64,
    pub lambda_up: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iters: 100,
            abs_tol: 1e-14,
            lambda_init: 1e-3,
            lambda_down: 0.5,
            lambda_up: 4.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome {
    pub params: DVector<f64>,
    pub residual_norm: f64,
    /// Accepted steps.
    pub iterations: usize,
    pub converged: bool,
    /// Residual norm after every accepted step, starting from the initial point.
    pub history: Vec<f64>,
}

const LAMBDA_MAX: f64 = 1e16;

/// Minimize `‖r(p)‖²` from `p0`. Steps solve `(JᵀJ + μI) δ = -Jᵀr` with
/// `μ = λ · mean(diag JᵀJ)`; a step is accepted only if it lowers `‖r‖`.
pub fn levenberg_marquardt<P: LeastSquares + ?Sized>(
    problem: &P,
    p0: DVector<f64>,
    opts: &LmOptions,
) -> LmOutcome {
    let mut p = p0;
    let (mut r, mut jac) = problem.evaluate(&p);
    let mut norm = r.norm();
    let mut lambda = opts.lambda_init;
    let mut history = vec![norm];
    let mut iterations = 0;
    let n = p.len();

    let mut trials = 0;
    while norm > opts.abs_tol && iterations < opts.max_iters && trials < 4 * opts.max_iters {
        trials += 1;
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let scale = (jtj.trace() / n as f64).max(f64::MIN_POSITIVE);
        let mut system = jtj;
        for i in 0..n {
            system[(i, i)] += lambda * scale;
        }
        let step = match system.cholesky() {
            Some(ch) => ch.solve(&(-&jtr)),
            None => {
                lambda *= opts.lambda_up;
                if lambda > LAMBDA_MAX {
                    break;
                }
                continue;
            }
        };
        let candidate = &p + &step;
        let (r_new, jac_new) = problem.evaluate(&candidate);
        let norm_new = r_new.norm();
        if norm_new.is_finite() && norm_new < norm {
            p = candidate;
            r = r_new;
            jac = jac_new;
            norm = norm_new;
            lambda = (lambda * opts.lambda_down).max(1e-15);
            iterations += 1;
            history.push(norm);
            if step.norm() <= 1e-15 * (1.0 + p.norm()) {
                break;
            }
        } else {
            lambda *= opts.lambda_up;
            if lambda > LAMBDA_MAX {
                break;
            }
        }
    }

    LmOutcome {
        params: p,
        residual_norm: norm,
        iterations,
        converged: norm <= opts.abs_tol,
        history,
    }
}
