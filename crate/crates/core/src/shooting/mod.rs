//! Indirect methods: the extremal flow and shooting on its two-point
//! boundary value problem.
//!
//! Unknowns are always `(z(t_a), Gamma)` with `z = (x, lambda)` and `t_a`
//! the anchor node (`0` for classical shooting). The residual stacks
//! `R(x(0), x(T))` and `(-lambda(0); lambda(T)) - (R_x^T Gamma; R_y^T Gamma)`.

mod integrate;
mod newton;

pub use integrate::{integrate_extremal, pointwise_control, BLOW_UP_BOUND};

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, vstack};
use crate::model::Problem;
use crate::riccati::HyperbolicSplitting;
use crate::static_solver::StaticSolution;
use crate::trajectory::Extremal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Relative forward-difference step for the Newton Jacobian.
    pub fd_step: f64,
    /// Position of the middle-point anchor as a fraction of the horizon.
    pub anchor_fraction: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 200,
            max_halvings: 40,
            fd_step: 1e-7,
            anchor_fraction: 0.5,
        }
    }
}

/// Node closest to `fraction * steps`, kept strictly inside the grid.
pub fn anchor_node(steps: usize, fraction: f64) -> usize {
    let j = libm::round(fraction * steps as f64) as usize;
    j.clamp(1, steps - 1)
}

/// Transversality and terminal residual of a candidate extremal.
pub fn boundary_residual(
    p: &Problem,
    z0: &DVector<f64>,
    z_t: &DVector<f64>,
    gamma: &DVector<f64>,
) -> DVector<f64> {
    let n = p.n();
    let x0 = z0.rows(0, n).into_owned();
    let l0 = z0.rows(n, n).into_owned();
    let x_t = z_t.rows(0, n).into_owned();
    let l_t = z_t.rows(n, n).into_owned();
    let r = p.terminal_residual(&x0, &x_t);
    let (rx, ry) = p.terminal_jacobians(&x0, &x_t);
    let top = -l0 - rx.transpose() * gamma;
    let bottom = l_t - ry.transpose() * gamma;
    vstack(&r, &vstack(&top, &bottom))
}

/// Integrates from the anchor node both ways and returns all nodes.
fn sweep(p: &Problem, horizon: f64, steps: usize, anchor: usize, z_a: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    let t_a = horizon * anchor as f64 / steps as f64;
    let mut nodes = if anchor > 0 {
        let mut back = integrate_extremal(p, z_a, t_a, 0.0, anchor)?;
        back.reverse();
        back
    } else {
        alloc::vec![z_a.clone()]
    };
    if anchor < steps {
        let fwd = integrate_extremal(p, z_a, t_a, horizon, steps - anchor)?;
        nodes.extend(fwd.into_iter().skip(1));
    }
    Ok(nodes)
}

fn shoot(
    p: &Problem,
    horizon: f64,
    steps: usize,
    anchor: usize,
    z_guess: &DVector<f64>,
    gamma_guess: &DVector<f64>,
    opts: &ShootingOptions,
) -> Result<Extremal> {
    let (n, k) = (p.n(), p.k());
    if !(horizon > 0.0) || steps < 1 {
        return Err(Error::InvalidArgument("horizon must be positive and steps at least 1".into()));
    }
    if z_guess.len() != 2 * n || gamma_guess.len() != k {
        return Err(Error::DimensionMismatch {
            what: "shooting guess",
            expected: 2 * n + k,
            got: z_guess.len() + gamma_guess.len(),
        });
    }
    if !z_guess.iter().chain(gamma_guess.iter()).all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("shooting guess is not finite".into()));
    }
    let eval = |w: &DVector<f64>| -> Result<DVector<f64>> {
        let z_a = w.rows(0, 2 * n).into_owned();
        let gamma = w.rows(2 * n, k).into_owned();
        let nodes = sweep(p, horizon, steps, anchor, &z_a)?;
        Ok(boundary_residual(p, &nodes[0], &nodes[steps], &gamma))
    };
    let out = newton::solve(eval, vstack(z_guess, gamma_guess), opts)?;
    let z_a = out.w.rows(0, 2 * n).into_owned();
    let gamma = out.w.rows(2 * n, k).into_owned();
    let nodes = sweep(p, horizon, steps, anchor, &z_a)?;
    assemble(p, horizon, nodes, gamma, linalg::vec_inf_norm(&out.residual), out.iterations)
}

fn assemble(
    p: &Problem,
    horizon: f64,
    nodes: Vec<DVector<f64>>,
    gamma: DVector<f64>,
    boundary_residual: f64,
    iterations: usize,
) -> Result<Extremal> {
    let n = p.n();
    let steps = nodes.len() - 1;
    let mut x = Vec::with_capacity(nodes.len());
    let mut lambda = Vec::with_capacity(nodes.len());
    let mut u = Vec::with_capacity(nodes.len());
    let mut warm = DVector::zeros(p.m());
    for z in &nodes {
        let xi = z.rows(0, n).into_owned();
        let li = z.rows(n, n).into_owned();
        warm = pointwise_control(p, &xi, &li, &warm)?;
        u.push(warm.clone());
        x.push(xi);
        lambda.push(li);
    }
    Ok(Extremal {
        t: Extremal::uniform_grid(horizon, steps),
        x,
        lambda,
        u,
        gamma,
        boundary_residual,
        iterations,
    })
}

/// Classical shooting: the unknown is `z(0)`.
pub fn classic_shoot(
    p: &Problem,
    horizon: f64,
    steps: usize,
    guess_z0: &DVector<f64>,
    guess_gamma: &DVector<f64>,
    opts: &ShootingOptions,
) -> Result<Extremal> {
    shoot(p, horizon, steps, 0, guess_z0, guess_gamma, opts)
}

/// Middle-point shooting: the unknown is `z` at the anchor node (`T/2` by
/// default), started from the static point and its multiplier.
pub fn midpoint_shoot(
    p: &Problem,
    horizon: f64,
    steps: usize,
    s: &StaticSolution,
    opts: &ShootingOptions,
) -> Result<Extremal> {
    if steps < 2 {
        return Err(Error::InvalidArgument("middle-point shooting needs at least 2 steps".into()));
    }
    if !(opts.anchor_fraction > 0.0 && opts.anchor_fraction < 1.0) {
        return Err(Error::InvalidArgument("anchor fraction must lie in (0, 1)".into()));
    }
    let anchor = anchor_node(steps, opts.anchor_fraction);
    let z = vstack(&s.x_bar, &s.lambda_bar);
    shoot(p, horizon, steps, anchor, &z, &s.gamma_bar, opts)
}

/// The linear system governing the shooting Newton step near the turnpike.
#[derive(Debug, Clone, PartialEq)]
pub struct WellPosednessMatrix {
    /// `[[R_x, R_y, 0], [E_- + N_1, N_2, R_x^T], [N_3, -E_+ + N_4, R_y^T]]`.
    pub q: DMatrix<f64>,
    /// Reciprocal 2-norm condition number of `q`.
    pub rcond: f64,
}

pub fn build_wellposedness_matrix(
    p: &Problem,
    s: &StaticSolution,
    split: &HyperbolicSplitting,
) -> WellPosednessMatrix {
    let (n, k) = (p.n(), p.k());
    let (rx, ry) = p.terminal_jacobians(&s.x_bar, &s.x_bar);
    let c = p.terminal().curvature(&s.gamma_bar, &s.x_bar, &s.x_bar);
    let mut q = DMatrix::zeros(k + 2 * n, 2 * n + k);
    q.view_mut((0, 0), (k, n)).copy_from(&rx);
    q.view_mut((0, n), (k, n)).copy_from(&ry);
    q.view_mut((k, 0), (n, n)).copy_from(&(&split.e_minus + &c.n1));
    q.view_mut((k, n), (n, n)).copy_from(&c.n2);
    q.view_mut((k, 2 * n), (n, k)).copy_from(&rx.transpose());
    q.view_mut((k + n, 0), (n, n)).copy_from(&c.n3);
    q.view_mut((k + n, n), (n, n)).copy_from(&(-&split.e_plus + &c.n4));
    q.view_mut((k + n, 2 * n), (n, k)).copy_from(&ry.transpose());
    let rcond = linalg::rcond(&q);
    WellPosednessMatrix { q, rcond }
}
