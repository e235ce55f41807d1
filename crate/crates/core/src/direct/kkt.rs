//! Newton iteration on the KKT system of the transcription.
//!
//! Unknowns are ordered stage by stage as `(u_i, mu_i, x_{i+1})`, which keeps
//! the KKT matrix banded with half-bandwidth `m + 2n - 1`; `x_0` and `nu`
//! couple both ends of the horizon and form a dense border.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::{DirectOptions, Transcription};
use crate::error::{Error, Result};
use crate::linalg::BorderedBandSystem;
use crate::model::{hessian_blocks, ExtremalPoint, Problem};

const PIVOT_TOL: f64 = 1e-14;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone)]
pub(super) struct State {
    pub x: Vec<DVector<f64>>,
    pub u: Vec<DVector<f64>>,
    pub mu: Vec<DVector<f64>>,
    pub nu: DVector<f64>,
}

struct Layout {
    n: usize,
    m: usize,
    stage: usize,
    band: usize,
}

impl Layout {
    fn new(p: &Problem, steps: usize) -> Self {
        let (n, m) = (p.n(), p.m());
        let stage = m + 2 * n;
        Self {
            n,
            m,
            stage,
            band: steps * stage,
        }
    }

    fn u(&self, i: usize) -> usize {
        i * self.stage
    }

    fn mu(&self, i: usize) -> usize {
        i * self.stage + self.m
    }

    fn x(&self, i: usize) -> usize {
        if i == 0 {
            self.band
        } else {
            (i - 1) * self.stage + self.m + self.n
        }
    }

    fn nu(&self) -> usize {
        self.band + self.n
    }
}

/// KKT residual in the unknown ordering, with the merit ingredients.
struct Evaluation {
    r: DVector<f64>,
    objective: f64,
    violation: f64,
    /// Gradient of the objective in the unknown ordering (zero on multipliers).
    grad: DVector<f64>,
}

fn evaluate(t: &Transcription, lay: &Layout, s: &State) -> Evaluation {
    let p = t.problem;
    let (n, m, h, steps) = (lay.n, lay.m, t.h(), t.steps);
    let k = p.k();
    let dim = lay.band + n + k;
    let mut r = DVector::zeros(dim);
    let mut grad = DVector::zeros(dim);
    let mut objective = 0.0;
    let mut violation = 0.0;
    for i in 0..steps {
        let (x, u, mu) = (&s.x[i], &s.u[i], &s.mu[i]);
        let (hx, hu) = p.hamiltonian_gradients(x, mu, u);
        let (gx, gu) = p.cost_gradients(x, u);
        objective += h * p.running_cost(x, u);
        for a in 0..m {
            r[lay.u(i) + a] = -h * hu[a];
            grad[lay.u(i) + a] = h * gu[a];
        }
        let c = &s.x[i + 1] - x - p.dynamics(x, u) * h;
        violation += c.lp_norm(1);
        for a in 0..n {
            r[lay.mu(i) + a] = c[a];
            r[lay.x(i) + a] += -h * hx[a] - mu[a];
            r[lay.x(i + 1) + a] += mu[a];
            grad[lay.x(i) + a] += h * gx[a];
        }
    }
    let (x0, xn) = (&s.x[0], &s.x[steps]);
    let (rx, ry) = p.terminal_jacobians(x0, xn);
    let rv = p.terminal_residual(x0, xn);
    violation += rv.lp_norm(1);
    let tx = rx.transpose() * &s.nu;
    let ty = ry.transpose() * &s.nu;
    for a in 0..n {
        r[lay.x(0) + a] += tx[a];
        r[lay.x(steps) + a] += ty[a];
    }
    r.rows_mut(lay.nu(), k).copy_from(&rv);
    Evaluation {
        r,
        objective,
        violation,
        grad,
    }
}

/// Primal Hessian blocks `-h [[H_xx, H_xu], [H_ux, H_uu]]` per stage, the
/// Jacobians of the defects, and the terminal curvature.
struct Linearization {
    hxx: Vec<DMatrix<f64>>,
    hxu: Vec<DMatrix<f64>>,
    huu: Vec<DMatrix<f64>>,
    fx: Vec<DMatrix<f64>>,
    fu: Vec<DMatrix<f64>>,
    rx: DMatrix<f64>,
    ry: DMatrix<f64>,
    n1: DMatrix<f64>,
    n2: DMatrix<f64>,
    n3: DMatrix<f64>,
    n4: DMatrix<f64>,
}

fn linearize(t: &Transcription, s: &State) -> Result<Linearization> {
    let p = t.problem;
    let h = t.h();
    let steps = t.steps;
    let mut lin = Linearization {
        hxx: Vec::with_capacity(steps),
        hxu: Vec::with_capacity(steps),
        huu: Vec::with_capacity(steps),
        fx: Vec::with_capacity(steps),
        fu: Vec::with_capacity(steps),
        rx: DMatrix::zeros(0, 0),
        ry: DMatrix::zeros(0, 0),
        n1: DMatrix::zeros(0, 0),
        n2: DMatrix::zeros(0, 0),
        n3: DMatrix::zeros(0, 0),
        n4: DMatrix::zeros(0, 0),
    };
    for i in 0..steps {
        let point = ExtremalPoint {
            x: s.x[i].clone(),
            lambda: s.mu[i].clone(),
            u: s.u[i].clone(),
        };
        let b = hessian_blocks(p, &point)?;
        lin.hxx.push(b.hxx * -h);
        lin.hxu.push(b.hxu * -h);
        lin.huu.push(b.huu * -h);
        lin.fx.push(b.hxl);
        lin.fu.push(b.hlu);
    }
    let (x0, xn) = (&s.x[0], &s.x[steps]);
    let (rx, ry) = p.terminal_jacobians(x0, xn);
    let c = p.terminal().curvature(&s.nu, x0, xn);
    lin.rx = rx;
    lin.ry = ry;
    lin.n1 = c.n1;
    lin.n2 = c.n2;
    lin.n3 = c.n3;
    lin.n4 = c.n4;
    Ok(lin)
}

fn add_block(sys: &mut BorderedBandSystem, r0: usize, c0: usize, b: &DMatrix<f64>, transpose_too: bool) {
    for j in 0..b.ncols() {
        for i in 0..b.nrows() {
            let v = b[(i, j)];
            if v != 0.0 {
                sys.add(r0 + i, c0 + j, v);
                if transpose_too {
                    sys.add(c0 + j, r0 + i, v);
                }
            }
        }
    }
}

fn solve_kkt(
    t: &Transcription,
    lay: &Layout,
    lin: &Linearization,
    rhs: &DVector<f64>,
    tau: f64,
) -> Option<DVector<f64>> {
    let (n, m, h, steps) = (lay.n, lay.m, t.h(), t.steps);
    let k = lin.rx.nrows();
    let half = m + 2 * n;
    let mut sys = BorderedBandSystem::zeros(lay.band, n + k, half, half);
    let eye = DMatrix::<f64>::identity(n, n);
    for i in 0..steps {
        let (xi, ui, mi) = (lay.x(i), lay.u(i), lay.mu(i));
        add_block(&mut sys, xi, xi, &lin.hxx[i], false);
        add_block(&mut sys, xi, ui, &lin.hxu[i], true);
        add_block(&mut sys, ui, ui, &lin.huu[i], false);
        add_block(&mut sys, mi, lay.x(i + 1), &eye, true);
        add_block(&mut sys, mi, xi, &(-&eye - &lin.fx[i] * h), true);
        add_block(&mut sys, mi, ui, &(&lin.fu[i] * -h), true);
        for a in 0..m {
            sys.add(ui + a, ui + a, tau);
        }
    }
    for i in 0..=steps {
        for a in 0..n {
            sys.add(lay.x(i) + a, lay.x(i) + a, tau);
        }
    }
    let (x0, xn, nu) = (lay.x(0), lay.x(steps), lay.nu());
    add_block(&mut sys, nu, x0, &lin.rx, true);
    add_block(&mut sys, nu, xn, &lin.ry, true);
    add_block(&mut sys, x0, x0, &lin.n1, false);
    add_block(&mut sys, x0, xn, &lin.n2, false);
    add_block(&mut sys, xn, x0, &lin.n3, false);
    add_block(&mut sys, xn, xn, &lin.n4, false);
    sys.solve(rhs, PIVOT_TOL)
}

/// `d^T (H + tau I) d` over the primal part of a step.
fn curvature(t: &Transcription, lay: &Layout, lin: &Linearization, d: &DVector<f64>, tau: f64) -> f64 {
    let (n, m) = (lay.n, lay.m);
    let mut total = 0.0;
    for i in 0..t.steps {
        let dx = d.rows(lay.x(i), n);
        let du = d.rows(lay.u(i), m);
        total += dx.dot(&(&lin.hxx[i] * dx)) + 2.0 * dx.dot(&(&lin.hxu[i] * du)) + du.dot(&(&lin.huu[i] * du));
        total += tau * du.norm_squared();
    }
    let dx0 = d.rows(lay.x(0), n);
    let dxn = d.rows(lay.x(t.steps), n);
    total += dx0.dot(&(&lin.n1 * dx0)) + dx0.dot(&(&lin.n2 * dxn)) + dxn.dot(&(&lin.n3 * dx0)) + dxn.dot(&(&lin.n4 * dxn));
    for i in 0..=t.steps {
        total += tau * d.rows(lay.x(i), n).norm_squared();
    }
    total
}

fn apply(lay: &Layout, s: &State, d: &DVector<f64>, alpha: f64) -> State {
    let (n, m) = (lay.n, lay.m);
    let steps = s.u.len();
    let mut out = s.clone();
    for i in 0..=steps {
        out.x[i] += d.rows(lay.x(i), n) * alpha;
    }
    for i in 0..steps {
        out.u[i] += d.rows(lay.u(i), m) * alpha;
        out.mu[i] += d.rows(lay.mu(i), n) * alpha;
    }
    let k = s.nu.len();
    out.nu += d.rows(lay.nu(), k) * alpha;
    out
}

fn multiplier_size(lay: &Layout, s: &State, d: &DVector<f64>) -> f64 {
    let mut size: f64 = 0.0;
    for i in 0..s.mu.len() {
        size = size.max((&s.mu[i] + d.rows(lay.mu(i), lay.n)).amax());
    }
    size.max((&s.nu + d.rows(lay.nu(), s.nu.len())).amax())
}

/// Returns the converged state, its KKT residual and the iteration count.
pub(super) fn newton(t: &Transcription, mut s: State, opts: &DirectOptions) -> Result<(State, f64, usize)> {
    let lay = Layout::new(t.problem, t.steps);
    let mut eval = evaluate(t, &lay, &s);
    let mut penalty: f64 = 1.0;
    let mut tau = opts.initial_regularization;
    let mut iterations = 0;
    loop {
        let kkt = eval.r.amax();
        if !kkt.is_finite() {
            return Err(Error::DirectDiverged {
                iterations,
                kkt_residual: kkt,
            });
        }
        if kkt <= opts.tolerance {
            return Ok((s, kkt, iterations));
        }
        if iterations >= opts.max_iterations {
            return Err(Error::DirectDiverged {
                iterations,
                kkt_residual: kkt,
            });
        }
        let lin = linearize(t, &s)?;
        let rhs = -&eval.r;
        // Shrink the shift after a successful step, grow it on failure or
        // negative curvature.
        tau = (tau * 0.1).max(opts.initial_regularization);
        let d = loop {
            match solve_kkt(t, &lay, &lin, &rhs, tau) {
                Some(d) if curvature(t, &lay, &lin, &d, tau) >= 0.0 => break d,
                _ => {
                    tau *= 10.0;
                    if tau > opts.max_regularization {
                        return Err(Error::KktFactorization { tau });
                    }
                }
            }
        };
        penalty = penalty.max(1.1 * multiplier_size(&lay, &s, &d) + 1e-3);
        let merit = eval.objective + penalty * eval.violation;
        let slope = eval.grad.dot(&d) - penalty * eval.violation;
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = apply(&lay, &s, &d, alpha);
            let te = evaluate(t, &lay, &trial);
            let trial_merit = te.objective + penalty * te.violation;
            let trial_kkt = te.r.amax();
            let merit_ok = trial_merit.is_finite() && trial_merit <= merit + ARMIJO * alpha * slope.min(0.0);
            let kkt_ok = trial_kkt.is_finite() && trial_kkt <= (1.0 - ARMIJO * alpha) * kkt;
            if (merit_ok && trial_kkt.is_finite()) || kkt_ok {
                accepted = Some((trial, te));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, te)) => {
                s = trial;
                eval = te;
            }
            None => {
                return Err(Error::DirectDiverged {
                    iterations,
                    kkt_residual: kkt,
                })
            }
        }
        iterations += 1;
    }
}
