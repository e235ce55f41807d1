//! Optimal control problems, their Hamiltonian, and the linearization at a
//! static extremal point.
//!
//! The Hamiltonian is always the normal one, `H = <lambda, f(x, u)> - f0(x, u)`;
//! the cost multiplier is fixed to `-1` and never stored.

mod affine;
mod lq;
mod terminal;

pub use affine::{ControlAffineQuadratic, Curvature, FieldJacobian, VectorField};
pub use lq::LinearQuadratic;
pub use terminal::{PairMap, PointMap, Terminal, TerminalCurvature, TerminalKind};

use alloc::boxed::Box;
use alloc::string::String;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fd;
use crate::linalg::{self, symmetrize};
use crate::static_solver::StaticSolution;

/// Condition number of `H_uu` above which the strong Legendre condition is
/// considered violated.
pub const LEGENDRE_CONDITION_LIMIT: f64 = 1e12;

/// Relative singular-value threshold for the Kalman rank test.
pub const KALMAN_RANK_RTOL: f64 = 1e-10;

/// Dynamics and running cost of a control system.
///
/// Only the four required methods must be provided; every derivative falls
/// back to central finite differences when the corresponding hook returns
/// `None`.
pub trait Model: Send + Sync {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;
    fn dynamics(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64>;
    fn running_cost(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64;

    /// `(df/dx, df/du)`.
    fn dynamics_jacobians(
        &self,
        _x: &DVector<f64>,
        _u: &DVector<f64>,
    ) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        None
    }

    /// `(grad_x f0, grad_u f0)`.
    fn cost_gradients(
        &self,
        _x: &DVector<f64>,
        _u: &DVector<f64>,
    ) -> Option<(DVector<f64>, DVector<f64>)> {
        None
    }

    fn hamiltonian_hessian(
        &self,
        _x: &DVector<f64>,
        _lambda: &DVector<f64>,
        _u: &DVector<f64>,
    ) -> Option<HamiltonianBlocks> {
        None
    }

    /// Closed-form solution of `dH/du = 0`, if the model has one.
    fn control_law(&self, _x: &DVector<f64>, _lambda: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }

    fn as_linear_quadratic(&self) -> Option<&LinearQuadratic> {
        None
    }
}

/// A normal extremal point `(x, lambda, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalPoint {
    pub x: DVector<f64>,
    pub lambda: DVector<f64>,
    pub u: DVector<f64>,
}

impl ExtremalPoint {
    pub fn new(x: DVector<f64>, lambda: DVector<f64>, u: DVector<f64>) -> Result<Self> {
        if x.len() != lambda.len() {
            return Err(Error::DimensionMismatch {
                what: "lambda",
                expected: x.len(),
                got: lambda.len(),
            });
        }
        let all_finite = x.iter().chain(lambda.iter()).chain(u.iter()).all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidArgument("extremal point has non-finite entries".into()));
        }
        Ok(Self { x, lambda, u })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            x: DVector::zeros(n),
            lambda: DVector::zeros(n),
            u: DVector::zeros(m),
        }
    }
}

/// Second derivatives of `H` at an extremal point.
///
/// `hxl = df/dx` and `hlu = df/du`; `hxu[(i, j)] = d^2 H / dx_i du_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianBlocks {
    pub hxx: DMatrix<f64>,
    pub hxl: DMatrix<f64>,
    pub hxu: DMatrix<f64>,
    pub hlu: DMatrix<f64>,
    pub huu: DMatrix<f64>,
}

/// Matrices `A`, `B`, `W` of the linearized extremal flow, with the `H_uu`
/// block they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizationData {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub huu: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub kalman_rank: usize,
    pub kalman_ok: bool,
    pub huu_negdef: bool,
    /// Smallest eigenvalue of `-H_uu`.
    pub huu_min_eig: f64,
    pub w_posdef: bool,
    pub w_min_eig: f64,
    pub r_full_rank: bool,
    pub r_rank: usize,
}

impl AssumptionReport {
    pub fn all_ok(&self) -> bool {
        self.kalman_ok && self.huu_negdef && self.w_posdef && self.r_full_rank
    }
}

/// An optimal control problem: a [`Model`] plus terminal conditions.
pub struct Problem {
    name: String,
    model: Box<dyn Model>,
    terminal: Terminal,
}

impl core::fmt::Debug for Problem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("n", &self.n())
            .field("m", &self.m())
            .field("k", &self.k())
            .field("terminal", &self.terminal)
            .finish()
    }
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        model: impl Model + 'static,
        terminal: Terminal,
    ) -> Result<Self> {
        let n = model.state_dim();
        let m = model.control_dim();
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument("n and m must be at least 1".into()));
        }
        let k = terminal.dim(n);
        if k == 0 || k > 2 * n {
            return Err(Error::InvalidArgument(alloc::format!(
                "number of terminal relations must lie in [1, 2n], got {k}"
            )));
        }
        for (what, v) in [
            ("x0", terminal.initial_state()),
            ("x1", terminal.final_state()),
        ] {
            if let Some(v) = v {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        what,
                        expected: n,
                        got: v.len(),
                    });
                }
            }
        }
        Ok(Self {
            name: name.into(),
            model: Box::new(model),
            terminal,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.model.state_dim()
    }

    pub fn m(&self) -> usize {
        self.model.control_dim()
    }

    pub fn k(&self) -> usize {
        self.terminal.dim(self.n())
    }

    pub fn model(&self) -> &dyn Model {
        self.model.as_ref()
    }

    pub fn terminal(&self) -> &Terminal {
        &self.terminal
    }

    pub fn linear_quadratic(&self) -> Option<&LinearQuadratic> {
        self.model.as_linear_quadratic()
    }

    pub fn dynamics(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        self.model.dynamics(x, u)
    }

    pub fn running_cost(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        self.model.running_cost(x, u)
    }

    /// `(df/dx, df/du)`, analytic when available.
    pub fn dynamics_jacobians(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        self.model
            .dynamics_jacobians(x, u)
            .unwrap_or_else(|| self.fd_dynamics_jacobians(x, u))
    }

    pub fn fd_dynamics_jacobians(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n();
        (
            fd::jacobian(|v| self.dynamics(v, u), x, n),
            fd::jacobian(|v| self.dynamics(x, v), u, n),
        )
    }

    pub fn cost_gradients(&self, x: &DVector<f64>, u: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        self.model.cost_gradients(x, u).unwrap_or_else(|| {
            (
                fd::gradient(|v| self.running_cost(v, u), x),
                fd::gradient(|v| self.running_cost(x, v), u),
            )
        })
    }

    pub fn hamiltonian(&self, x: &DVector<f64>, lambda: &DVector<f64>, u: &DVector<f64>) -> f64 {
        lambda.dot(&self.dynamics(x, u)) - self.running_cost(x, u)
    }

    /// `(dH/dx, dH/du)`.
    pub fn hamiltonian_gradients(
        &self,
        x: &DVector<f64>,
        lambda: &DVector<f64>,
        u: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let (fx, fu) = self.dynamics_jacobians(x, u);
        let (gx, gu) = self.cost_gradients(x, u);
        (fx.transpose() * lambda - gx, fu.transpose() * lambda - gu)
    }

    pub fn terminal_residual(&self, x0: &DVector<f64>, x1: &DVector<f64>) -> DVector<f64> {
        self.terminal.residual(x0, x1)
    }

    pub fn terminal_jacobians(
        &self,
        x0: &DVector<f64>,
        x1: &DVector<f64>,
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        self.terminal.jacobians(x0, x1)
    }

    fn check_point(&self, e: &ExtremalPoint) -> Result<()> {
        let (n, m) = (self.n(), self.m());
        for (what, expected, got) in [
            ("x", n, e.x.len()),
            ("lambda", n, e.lambda.len()),
            ("u", m, e.u.len()),
        ] {
            if expected != got {
                return Err(Error::DimensionMismatch {
                    what,
                    expected,
                    got,
                });
            }
        }
        Ok(())
    }
}

/// `H(x, lambda, -1, u) = <lambda, f(x, u)> - f0(x, u)`.
pub fn eval_hamiltonian(p: &Problem, e: &ExtremalPoint) -> Result<f64> {
    p.check_point(e)?;
    Ok(p.hamiltonian(&e.x, &e.lambda, &e.u))
}

/// Hessian blocks of `H`, analytic when the model supplies them.
pub fn hessian_blocks(p: &Problem, e: &ExtremalPoint) -> Result<HamiltonianBlocks> {
    p.check_point(e)?;
    let blocks = match p.model.hamiltonian_hessian(&e.x, &e.lambda, &e.u) {
        Some(b) => b,
        None => fd_hessian_blocks_unchecked(p, e),
    };
    check_finite(&blocks)?;
    Ok(blocks)
}

/// Hessian blocks of `H` by finite differences only, ignoring any analytic
/// second derivatives the model provides.
pub fn fd_hessian_blocks(p: &Problem, e: &ExtremalPoint) -> Result<HamiltonianBlocks> {
    p.check_point(e)?;
    let blocks = fd_hessian_blocks_unchecked(p, e);
    check_finite(&blocks)?;
    Ok(blocks)
}

fn fd_hessian_blocks_unchecked(p: &Problem, e: &ExtremalPoint) -> HamiltonianBlocks {
    let (n, m) = (p.n(), p.m());
    let joint = linalg::vstack(&e.x, &e.u);
    let hess = fd::hessian(
        |v| {
            let x = v.rows(0, n).into_owned();
            let u = v.rows(n, m).into_owned();
            p.hamiltonian(&x, &e.lambda, &u)
        },
        &joint,
    );
    let (fx, fu) = p.dynamics_jacobians(&e.x, &e.u);
    HamiltonianBlocks {
        hxx: hess.view((0, 0), (n, n)).into_owned(),
        hxl: fx,
        hxu: hess.view((0, n), (n, m)).into_owned(),
        hlu: fu,
        huu: hess.view((n, n), (m, m)).into_owned(),
    }
}

fn check_finite(b: &HamiltonianBlocks) -> Result<()> {
    for (block, mat) in [
        ("Hxx", &b.hxx),
        ("Hxl", &b.hxl),
        ("Hxu", &b.hxu),
        ("Hlu", &b.hlu),
        ("Huu", &b.huu),
    ] {
        for c in 0..mat.ncols() {
            for r in 0..mat.nrows() {
                if !mat[(r, c)].is_finite() {
                    return Err(Error::NonFiniteDerivative {
                        block,
                        row: r,
                        col: c,
                    });
                }
            }
        }
    }
    Ok(())
}

/// `A = H_xl - B H_uu^{-1} H_xu^T`, `B = H_lu`,
/// `W = -H_xx + H_xu H_uu^{-1} H_xu^T` (symmetrized).
pub fn assemble_abw(b: &HamiltonianBlocks) -> Result<LinearizationData> {
    let s = linalg::singular_values(&b.huu);
    let condition = if s.is_empty() || s[s.len() - 1] == 0.0 {
        f64::INFINITY
    } else {
        s[0] / s[s.len() - 1]
    };
    if !(condition <= LEGENDRE_CONDITION_LIMIT) {
        return Err(Error::LegendreViolated { condition });
    }
    let huu_inv = linalg::inverse(&b.huu).ok_or(Error::LegendreViolated { condition })?;
    let hux = b.hxu.transpose();
    let a = &b.hxl - &b.hlu * &huu_inv * &hux;
    let w = symmetrize(&(-&b.hxx + &b.hxu * &huu_inv * &hux));
    Ok(LinearizationData {
        a,
        b: b.hlu.clone(),
        w,
        huu: b.huu.clone(),
    })
}

/// Controllability matrix `(B, AB, ..., A^{n-1} B)`.
pub fn controllability_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let m = b.ncols();
    let mut out = DMatrix::zeros(n, n * m);
    let mut block = b.clone();
    for i in 0..n {
        out.view_mut((0, i * m), (n, m)).copy_from(&block);
        block = a * block;
    }
    out
}

/// Checks the standing assumptions of the turnpike estimate at the static
/// solution.
pub fn check_assumptions(
    d: &LinearizationData,
    p: &Problem,
    s: &StaticSolution,
) -> AssumptionReport {
    let n = d.a.nrows();
    let kalman_rank = linalg::rank(&controllability_matrix(&d.a, &d.b), KALMAN_RANK_RTOL);
    let (huu_min_eig, _) = linalg::sym_eig_range(&(-&d.huu));
    let (w_min_eig, _) = linalg::sym_eig_range(&d.w);
    let (rx, ry) = p.terminal_jacobians(&s.x_bar, &s.x_bar);
    let k = rx.nrows();
    let mut dr = DMatrix::zeros(k, 2 * n);
    dr.view_mut((0, 0), (k, n)).copy_from(&rx);
    dr.view_mut((0, n), (k, n)).copy_from(&ry);
    let r_rank = linalg::rank(&dr, KALMAN_RANK_RTOL);
    AssumptionReport {
        kalman_rank,
        kalman_ok: kalman_rank == n,
        huu_negdef: huu_min_eig > 0.0,
        huu_min_eig,
        w_posdef: w_min_eig > 0.0,
        w_min_eig,
        r_full_rank: r_rank == k,
        r_rank,
    }
}
