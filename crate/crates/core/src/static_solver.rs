//! The static problem `min f0(x, u)` subject to `f(x, u) = 0`, solved through
//! its Lagrange system `dH/dlambda = dH/dx = dH/du = 0` with `lambda0 = -1`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, vec_inf_norm};
use crate::model::{hessian_blocks, ExtremalPoint, Problem};

#[derive(Debug, Clone, PartialEq)]
pub struct StaticSolution {
    pub x_bar: DVector<f64>,
    pub u_bar: DVector<f64>,
    pub lambda_bar: DVector<f64>,
    /// Infinity norm of the optimality-system residual.
    pub kkt_residual: f64,
    pub gamma_bar: DVector<f64>,
    pub defect: f64,
    pub iterations: usize,
}

impl StaticSolution {
    pub fn point(&self) -> ExtremalPoint {
        ExtremalPoint {
            x: self.x_bar.clone(),
            lambda: self.lambda_bar.clone(),
            u: self.u_bar.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub backtrack_factor: f64,
    pub min_step: f64,
}

impl Default for StaticOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100,
            backtrack_factor: 0.5,
            min_step: 1e-12,
        }
    }
}

/// Residual of the static optimality system, stacked `(f, dH/dx, dH/du)`.
pub fn static_residual(p: &Problem, e: &ExtremalPoint) -> DVector<f64> {
    let f = p.dynamics(&e.x, &e.u);
    let (hx, hu) = p.hamiltonian_gradients(&e.x, &e.lambda, &e.u);
    linalg::vstack(&linalg::vstack(&f, &hx), &hu)
}

fn split(p: &Problem, w: &DVector<f64>) -> ExtremalPoint {
    let (n, m) = (p.n(), p.m());
    ExtremalPoint {
        x: w.rows(0, n).into_owned(),
        lambda: w.rows(n, n).into_owned(),
        u: w.rows(2 * n, m).into_owned(),
    }
}

fn newton_matrix(p: &Problem, e: &ExtremalPoint) -> Result<DMatrix<f64>> {
    let (n, m) = (p.n(), p.m());
    let b = hessian_blocks(p, e)?;
    let dim = 2 * n + m;
    let mut jac = DMatrix::zeros(dim, dim);
    jac.view_mut((0, 0), (n, n)).copy_from(&b.hxl);
    jac.view_mut((0, 2 * n), (n, m)).copy_from(&b.hlu);
    jac.view_mut((n, 0), (n, n)).copy_from(&b.hxx);
    jac.view_mut((n, n), (n, n)).copy_from(&b.hxl.transpose());
    jac.view_mut((n, 2 * n), (n, m)).copy_from(&b.hxu);
    jac.view_mut((2 * n, 0), (m, n)).copy_from(&b.hxu.transpose());
    jac.view_mut((2 * n, n), (m, n)).copy_from(&b.hlu.transpose());
    jac.view_mut((2 * n, 2 * n), (m, m)).copy_from(&b.huu);
    Ok(jac)
}

/// Damped Newton on the static optimality system.
pub fn solve_static(p: &Problem, guess: &ExtremalPoint) -> Result<StaticSolution> {
    solve_static_with(p, guess, &StaticOptions::default())
}

pub fn solve_static_with(
    p: &Problem,
    guess: &ExtremalPoint,
    opts: &StaticOptions,
) -> Result<StaticSolution> {
    crate::model::eval_hamiltonian(p, guess)?;
    let mut w = linalg::vstack(&linalg::vstack(&guess.x, &guess.lambda), &guess.u);
    let mut point = guess.clone();
    let mut res = static_residual(p, &point);
    let mut iterations = 0;
    loop {
        let norm = vec_inf_norm(&res);
        if norm <= opts.tolerance {
            break;
        }
        if iterations >= opts.max_iterations || !norm.is_finite() {
            return Err(Error::StaticDiverged {
                iterations,
                residual: norm,
            });
        }
        let jac = newton_matrix(p, &point)?;
        let step = linalg::solve(&jac, &(-&res)).ok_or(Error::StaticSingular {
            iteration: iterations,
        })?;
        let merit = res.norm_squared();
        let mut alpha = 1.0;
        loop {
            let trial_w = &w + &step * alpha;
            let trial = split(p, &trial_w);
            let trial_res = static_residual(p, &trial);
            let trial_merit = trial_res.norm_squared();
            if trial_merit.is_finite() && trial_merit <= (1.0 - 1e-4 * alpha) * merit {
                w = trial_w;
                point = trial;
                res = trial_res;
                break;
            }
            alpha *= opts.backtrack_factor;
            if alpha < opts.min_step {
                return Err(Error::StaticDiverged {
                    iterations,
                    residual: norm,
                });
            }
        }
        iterations += 1;
    }
    finish(p, point, vec_inf_norm(&res), iterations)
}

fn finish(
    p: &Problem,
    point: ExtremalPoint,
    kkt_residual: f64,
    iterations: usize,
) -> Result<StaticSolution> {
    let gamma_bar = gamma_for(p, &point.x, &point.lambda)?;
    let mut s = StaticSolution {
        x_bar: point.x,
        u_bar: point.u,
        lambda_bar: point.lambda,
        kkt_residual,
        gamma_bar,
        defect: 0.0,
        iterations,
    };
    s.defect = compute_defect(p, &s);
    Ok(s)
}

/// Direct solve of the LQ static system
/// `[[A, B U^{-1} B^T], [Q, -A^T]] (x, lambda) = (-B ud, Q xd)`.
pub fn solve_static_lq(p: &Problem) -> Result<StaticSolution> {
    let lq = p
        .linear_quadratic()
        .ok_or_else(|| Error::InvalidArgument("solve_static_lq requires an LQ problem".into()))?;
    let n = p.n();
    let bub = &lq.b * lq.u_inv() * lq.b.transpose();
    let mut mat = DMatrix::zeros(2 * n, 2 * n);
    mat.view_mut((0, 0), (n, n)).copy_from(&lq.a);
    mat.view_mut((0, n), (n, n)).copy_from(&bub);
    mat.view_mut((n, 0), (n, n)).copy_from(&lq.q);
    mat.view_mut((n, n), (n, n)).copy_from(&(-lq.a.transpose()));
    if linalg::rcond(&mat) < 1e-14 {
        return Err(Error::StaticLqSingular);
    }
    let rhs = linalg::vstack(&(-(&lq.b * &lq.ud)), &(&lq.q * &lq.xd));
    let sol = linalg::solve(&mat, &rhs).ok_or(Error::StaticLqSingular)?;
    let x = sol.rows(0, n).into_owned();
    let lambda = sol.rows(n, n).into_owned();
    let u = &lq.ud + lq.u_inv() * (lq.b.transpose() * &lambda);
    let point = ExtremalPoint { x, lambda, u };
    let residual = vec_inf_norm(&static_residual(p, &point));
    finish(p, point, residual, 0)
}

fn gamma_for(p: &Problem, x_bar: &DVector<f64>, lambda_bar: &DVector<f64>) -> Result<DVector<f64>> {
    let (rx, ry) = p.terminal_jacobians(x_bar, x_bar);
    let gram = &rx * rx.transpose() + &ry * ry.transpose();
    if linalg::rcond(&gram) < 1e-14 {
        return Err(Error::TerminalMapSingular);
    }
    let rhs = (&ry - &rx) * lambda_bar;
    linalg::solve(&gram, &rhs).ok_or(Error::TerminalMapSingular)
}

/// `Gamma_bar = (R_x R_x^T + R_y R_y^T)^{-1} (-R_x + R_y) lambda_bar`, the
/// least-squares multiplier of the transversality conditions at the
/// static point.
pub fn compute_gamma_bar(p: &Problem, s: &StaticSolution) -> Result<DVector<f64>> {
    gamma_for(p, &s.x_bar, &s.lambda_bar)
}

/// Transversality mismatch `(-lambda_bar; lambda_bar) - [R_x^T; R_y^T] Gamma`.
pub fn transversality_residual(
    p: &Problem,
    s: &StaticSolution,
    gamma: &DVector<f64>,
) -> DVector<f64> {
    let (rx, ry) = p.terminal_jacobians(&s.x_bar, &s.x_bar);
    let top = -&s.lambda_bar - rx.transpose() * gamma;
    let bottom = &s.lambda_bar - ry.transpose() * gamma;
    linalg::vstack(&top, &bottom)
}

/// `D = |R(x_bar, x_bar)| + |transversality residual at Gamma_bar|`
/// (Euclidean norms).
pub fn compute_defect(p: &Problem, s: &StaticSolution) -> f64 {
    p.terminal_residual(&s.x_bar, &s.x_bar).norm()
        + transversality_residual(p, s, &s.gamma_bar).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearQuadratic, Terminal};
    use crate::registry;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn equilibrium_target_gives_zero_multiplier() {
        // f(x, u) = u, f0 = 1/2 |x - xd|^2 + 1/2 |u|^2
        let lq = LinearQuadratic::new(
            DMatrix::zeros(2, 2),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            dvector![0.3, -1.2],
            dvector![0.0, 0.0],
        )
        .unwrap();
        let p = Problem::new("drift-free", lq, Terminal::Periodic).unwrap();
        let s = solve_static(&p, &ExtremalPoint::zeros(2, 2)).unwrap();
        assert!((&s.x_bar - dvector![0.3, -1.2]).amax() < 1e-12);
        assert!(s.u_bar.amax() < 1e-12);
        assert!(s.lambda_bar.amax() < 1e-12);
        let lq_s = solve_static_lq(&p).unwrap();
        assert!((&lq_s.x_bar - &s.x_bar).amax() < 1e-12);
    }

    #[test]
    fn scalar_lq_hand_solution() {
        // x + lambda = 0 and x - lambda = 1
        let lq = LinearQuadratic::new(
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![1.0],
            dvector![1.0],
            dvector![0.0],
        )
        .unwrap();
        let p = Problem::new("scalar", lq, Terminal::FixedInitial { x0: dvector![0.0] }).unwrap();
        let s = solve_static_lq(&p).unwrap();
        assert!((s.x_bar[0] - 0.5).abs() < 1e-14);
        assert!((s.lambda_bar[0] + 0.5).abs() < 1e-14);
        assert!((s.u_bar[0] + 0.5).abs() < 1e-14);
    }

    #[test]
    fn lq_singular_when_uncontrolled_direction_is_neutral() {
        // null(A^T) and null(B^T) share e_2
        let lq = LinearQuadratic::new(
            dmatrix![1.0, 0.0; 0.0, 0.0],
            dmatrix![1.0; 0.0],
            DMatrix::identity(2, 2),
            dmatrix![1.0],
            dvector![1.0, 1.0],
            dvector![0.0],
        )
        .unwrap();
        let p = Problem::new("degenerate", lq, Terminal::Periodic).unwrap();
        assert_eq!(solve_static_lq(&p).unwrap_err(), Error::StaticLqSingular);
    }

    #[test]
    fn periodic_gamma_is_minus_lambda() {
        let lq = registry::oscillator_lq_model();
        let p = Problem::new("periodic", lq, Terminal::Periodic).unwrap();
        let s = solve_static(&p, &ExtremalPoint::zeros(2, 1)).unwrap();
        assert!((&s.gamma_bar + &s.lambda_bar).amax() < 1e-12);
        assert!(transversality_residual(&p, &s, &s.gamma_bar).amax() < 1e-12);
        assert!(s.defect < 1e-12);
    }

    #[test]
    fn fixed_both_gamma_blocks() {
        let x_bar = dvector![1.0, 0.0];
        let lq = registry::oscillator_lq_model();
        let p = Problem::new(
            "fixed-at-turnpike",
            lq,
            Terminal::FixedBoth {
                x0: x_bar.clone(),
                x1: x_bar,
            },
        )
        .unwrap();
        let s = solve_static(&p, &ExtremalPoint::zeros(2, 1)).unwrap();
        let expect = linalg::vstack(&(-&s.lambda_bar), &s.lambda_bar);
        assert!((&s.gamma_bar - expect).amax() < 1e-12);
        assert!(s.defect < 1e-12);
    }

    #[test]
    fn diverges_with_iteration_cap() {
        let p = registry::cubic_oscillator();
        let opts = StaticOptions {
            max_iterations: 0,
            ..StaticOptions::default()
        };
        let err = solve_static_with(&p, &ExtremalPoint::zeros(2, 1), &opts).unwrap_err();
        assert!(matches!(err, Error::StaticDiverged { iterations: 0, .. }));
    }

    #[test]
    fn zero_lambda_gives_zero_gamma() {
        let p = registry::oscillator_lq();
        let g = gamma_for(&p, &dvector![1.0, 0.0], &dvector![0.0, 0.0]).unwrap();
        assert_eq!(g, dvector![0.0, 0.0]);
    }
}
