use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::ShootingOptions;
use crate::error::{Error, Result};
use crate::linalg;

pub(super) struct Outcome {
    pub w: DVector<f64>,
    pub residual: DVector<f64>,
    pub iterations: usize,
}

fn norm(r: &DVector<f64>) -> f64 {
    r.norm()
}

/// Damped Newton with a forward-difference Jacobian, built once per
/// iteration and kept across the backtracking trials.
pub(super) fn solve(
    eval: impl Fn(&DVector<f64>) -> Result<DVector<f64>>,
    w0: DVector<f64>,
    opts: &ShootingOptions,
) -> Result<Outcome> {
    let mut w = w0;
    let mut res = eval(&w)?;
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let size = linalg::vec_inf_norm(&res);
        history.push(size);
        if size <= opts.tolerance {
            return Ok(Outcome {
                w,
                residual: res,
                iterations,
            });
        }
        let fail = |history: Vec<f64>| Error::ShootingFailed {
            iterations,
            residual: size,
            history,
        };
        if iterations >= opts.max_iterations {
            return Err(fail(history));
        }
        let jac = match jacobian(&eval, &w, &res, opts.fd_step) {
            Ok(j) => j,
            Err(_) => return Err(fail(history)),
        };
        let step = match newton_step(&jac, &res) {
            Some(s) => s,
            None => return Err(fail(history)),
        };
        let current = norm(&res);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = &w + &step * alpha;
            if let Ok(r) = eval(&trial) {
                let trial_norm = norm(&r);
                if trial_norm.is_finite() && trial_norm <= (1.0 - 1e-4 * alpha) * current {
                    accepted = Some((trial, r));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, r)) => {
                w = trial;
                res = r;
            }
            None => return Err(fail(history)),
        }
        iterations += 1;
    }
}

fn jacobian(
    eval: &impl Fn(&DVector<f64>) -> Result<DVector<f64>>,
    w: &DVector<f64>,
    base: &DVector<f64>,
    rel_step: f64,
) -> Result<DMatrix<f64>> {
    let mut jac = DMatrix::zeros(base.len(), w.len());
    let mut probe = w.clone();
    for j in 0..w.len() {
        let h = rel_step * (1.0 + w[j].abs());
        probe[j] = w[j] + h;
        let r = eval(&probe)?;
        probe[j] = w[j];
        jac.column_mut(j).copy_from(&((r - base) / h));
    }
    Ok(jac)
}

/// LU solve of `J d = -r`, with an SVD least-squares fallback when `J` is
/// numerically singular.
fn newton_step(jac: &DMatrix<f64>, res: &DVector<f64>) -> Option<DVector<f64>> {
    let rhs = -res;
    if linalg::rcond(jac) > 1e-14 {
        if let Some(s) = linalg::solve(jac, &rhs) {
            return Some(s);
        }
    }
    let svd = jac.clone().svd(true, true);
    let tol = 1e-14 * svd.singular_values.max();
    let s = svd.solve(&rhs, tol).ok()?;
    s.iter().all(|v| v.is_finite()).then_some(s)
}
