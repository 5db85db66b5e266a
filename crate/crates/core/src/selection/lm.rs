//! Levenberg–Marquardt with Marquardt's diagonal scaling.

use nalgebra::{DMatrix, DVector};

const MAX_ITERATIONS: usize = 500;
const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e16;

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub x: DVector<f64>,
    pub rss: f64,
    pub converged: bool,
    /// `JᵀJ` at the solution, for degeneracy checks.
    pub normal: DMatrix<f64>,
}

/// Minimizes `Σ r_i(x)²`. `eval` returns the residuals and their Jacobian.
pub(crate) fn minimize(
    eval: impl Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
    x0: DVector<f64>,
) -> LmOutcome {
    let mut x = x0;
    let (mut r, mut jac) = eval(&x);
    let mut cost = r.norm_squared();
    let mut lambda = LAMBDA_INIT;
    let mut converged = false;

    for _ in 0..MAX_ITERATIONS {
        if !cost.is_finite() {
            break;
        }
        if cost == 0.0 {
            converged = true;
            break;
        }
        let normal = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        if grad.amax() <= 1e-15 * cost.sqrt().max(1e-300) {
            converged = true;
            break;
        }

        let mut accepted = None;
        while lambda <= LAMBDA_MAX {
            let mut damped = normal.clone();
            for i in 0..damped.nrows() {
                damped[(i, i)] += lambda * normal[(i, i)].max(1e-12);
            }
            let step = damped.cholesky().map(|c| c.solve(&(-&grad)));
            if let Some(dx) = step {
                let trial = &x + &dx;
                let (rt, jt) = eval(&trial);
                let ct = rt.norm_squared();
                if ct.is_finite() && ct < cost {
                    accepted = Some((trial, rt, jt, ct, dx));
                    break;
                }
            }
            lambda *= 4.0;
        }

        let Some((trial, rt, jt, ct, dx)) = accepted else {
            // No descent direction left at any damping: a (numerical) minimum.
            converged = true;
            break;
        };
        let small_step = dx.norm() <= 1e-14 * (x.norm() + 1e-14);
        let small_gain = cost - ct <= 1e-10 * cost;
        x = trial;
        r = rt;
        jac = jt;
        cost = ct;
        lambda = (lambda / 3.0).max(1e-15);
        if small_step || small_gain {
            converged = true;
            break;
        }
    }

    let normal = jac.transpose() * &jac;
    LmOutcome {
        x,
        rss: cost,
        converged,
        normal,
    }
}
