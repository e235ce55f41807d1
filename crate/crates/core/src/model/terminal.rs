use alloc::boxed::Box;
use core::fmt;
use nalgebra::{DMatrix, DVector};

use crate::fd;
use crate::linalg::vstack;

pub type PointMap = Box<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type PairMap = Box<dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;

/// Terminal conditions `R(x(0), x(T)) = 0`.
pub enum Terminal {
    /// `x(0) = x0`, `x(T) = x1`; `R(x, y) = (x - x0, y - x1)`.
    FixedBoth { x0: DVector<f64>, x1: DVector<f64> },
    /// `x(0) = x0`, free final point; `R(x, y) = x - x0`.
    FixedInitial { x0: DVector<f64> },
    /// `x(0) = x0`, `g(x(T)) = 0`; `R(x, y) = (x - x0, g(y))`.
    ConstrainedFinal {
        x0: DVector<f64>,
        constraint_dim: usize,
        constraint: PointMap,
    },
    /// `x(0) = x(T)`; `R(x, y) = x - y`.
    Periodic,
    /// Arbitrary `R : R^n x R^n -> R^k`.
    General { dim: usize, map: PairMap },
}

/// Tag of a [`Terminal`], as used in problem files and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalKind {
    FixedBoth,
    FixedInitial,
    ConstrainedFinal,
    Periodic,
    General,
}

impl TerminalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalKind::FixedBoth => "fixed-both",
            TerminalKind::FixedInitial => "fixed-initial-free-final",
            TerminalKind::ConstrainedFinal => "constrained-final",
            TerminalKind::Periodic => "periodic",
            TerminalKind::General => "general",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "fixed-both" => TerminalKind::FixedBoth,
            "fixed-initial-free-final" => TerminalKind::FixedInitial,
            "constrained-final" => TerminalKind::ConstrainedFinal,
            "periodic" => TerminalKind::Periodic,
            "general" => TerminalKind::General,
            _ => return None,
        })
    }
}

impl fmt::Display for TerminalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::FixedBoth { x0, x1 } => f
                .debug_struct("FixedBoth")
                .field("x0", &x0.as_slice())
                .field("x1", &x1.as_slice())
                .finish(),
            Terminal::FixedInitial { x0 } => f
                .debug_struct("FixedInitial")
                .field("x0", &x0.as_slice())
                .finish(),
            Terminal::ConstrainedFinal {
                x0, constraint_dim, ..
            } => f
                .debug_struct("ConstrainedFinal")
                .field("x0", &x0.as_slice())
                .field("constraint_dim", constraint_dim)
                .finish_non_exhaustive(),
            Terminal::Periodic => f.write_str("Periodic"),
            Terminal::General { dim, .. } => f
                .debug_struct("General")
                .field("dim", dim)
                .finish_non_exhaustive(),
        }
    }
}

/// Second-derivative blocks of `sum_i gamma_i R^i` at a point.
#[derive(Debug, Clone)]
pub struct TerminalCurvature {
    /// `d^2 / dx^2`
    pub n1: DMatrix<f64>,
    /// `d^2 / dx dy`
    pub n2: DMatrix<f64>,
    /// `d^2 / dy dx`
    pub n3: DMatrix<f64>,
    /// `d^2 / dy^2`
    pub n4: DMatrix<f64>,
}

impl Terminal {
    pub fn kind(&self) -> TerminalKind {
        match self {
            Terminal::FixedBoth { .. } => TerminalKind::FixedBoth,
            Terminal::FixedInitial { .. } => TerminalKind::FixedInitial,
            Terminal::ConstrainedFinal { .. } => TerminalKind::ConstrainedFinal,
            Terminal::Periodic => TerminalKind::Periodic,
            Terminal::General { .. } => TerminalKind::General,
        }
    }

    /// Number of terminal relations `k` for state dimension `n`.
    pub fn dim(&self, n: usize) -> usize {
        match self {
            Terminal::FixedBoth { .. } => 2 * n,
            Terminal::FixedInitial { .. } | Terminal::Periodic => n,
            Terminal::ConstrainedFinal { constraint_dim, .. } => n + constraint_dim,
            Terminal::General { dim, .. } => *dim,
        }
    }

    /// Fixed initial state, when the conditions prescribe one.
    pub fn initial_state(&self) -> Option<&DVector<f64>> {
        match self {
            Terminal::FixedBoth { x0, .. }
            | Terminal::FixedInitial { x0 }
            | Terminal::ConstrainedFinal { x0, .. } => Some(x0),
            _ => None,
        }
    }

    /// Fixed final state, when the conditions prescribe one.
    pub fn final_state(&self) -> Option<&DVector<f64>> {
        match self {
            Terminal::FixedBoth { x1, .. } => Some(x1),
            _ => None,
        }
    }

    pub fn residual(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        match self {
            Terminal::FixedBoth { x0, x1 } => vstack(&(x - x0), &(y - x1)),
            Terminal::FixedInitial { x0 } => x - x0,
            Terminal::ConstrainedFinal { x0, constraint, .. } => vstack(&(x - x0), &constraint(y)),
            Terminal::Periodic => x - y,
            Terminal::General { map, .. } => map(x, y),
        }
    }

    /// `(R_x, R_y)`, each of shape `k x n`.
    pub fn jacobians(&self, x: &DVector<f64>, y: &DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = x.len();
        let k = self.dim(n);
        let eye = DMatrix::<f64>::identity(n, n);
        match self {
            Terminal::FixedBoth { .. } => {
                let mut rx = DMatrix::zeros(k, n);
                let mut ry = DMatrix::zeros(k, n);
                rx.view_mut((0, 0), (n, n)).copy_from(&eye);
                ry.view_mut((n, 0), (n, n)).copy_from(&eye);
                (rx, ry)
            }
            Terminal::FixedInitial { .. } => (eye, DMatrix::zeros(n, n)),
            Terminal::Periodic => (eye.clone(), -eye),
            Terminal::ConstrainedFinal {
                constraint_dim,
                constraint,
                ..
            } => {
                let mut rx = DMatrix::zeros(k, n);
                let mut ry = DMatrix::zeros(k, n);
                rx.view_mut((0, 0), (n, n)).copy_from(&eye);
                let g = fd::jacobian(|v| constraint(v), y, *constraint_dim);
                ry.view_mut((n, 0), (*constraint_dim, n)).copy_from(&g);
                (rx, ry)
            }
            Terminal::General { map, dim } => {
                let joint = vstack(x, y);
                let jac = fd::jacobian(
                    |v| map(&v.rows(0, n).into_owned(), &v.rows(n, n).into_owned()),
                    &joint,
                    *dim,
                );
                (
                    jac.columns(0, n).into_owned(),
                    jac.columns(n, n).into_owned(),
                )
            }
        }
    }

    /// Curvature of `gamma^T R` at `(x, y)`.
    pub fn curvature(
        &self,
        gamma: &DVector<f64>,
        x: &DVector<f64>,
        y: &DVector<f64>,
    ) -> TerminalCurvature {
        let n = x.len();
        let zero = || DMatrix::zeros(n, n);
        match self {
            Terminal::FixedBoth { .. } | Terminal::FixedInitial { .. } | Terminal::Periodic => {
                TerminalCurvature {
                    n1: zero(),
                    n2: zero(),
                    n3: zero(),
                    n4: zero(),
                }
            }
            Terminal::ConstrainedFinal { constraint, .. } => {
                let weights = gamma.rows(n, gamma.len() - n).into_owned();
                let n4 = fd::hessian(|v| weights.dot(&constraint(v)), y);
                TerminalCurvature {
                    n1: zero(),
                    n2: zero(),
                    n3: zero(),
                    n4,
                }
            }
            Terminal::General { map, .. } => {
                let joint = vstack(x, y);
                let h = fd::hessian(
                    |v| gamma.dot(&map(&v.rows(0, n).into_owned(), &v.rows(n, n).into_owned())),
                    &joint,
                );
                TerminalCurvature {
                    n1: h.view((0, 0), (n, n)).into_owned(),
                    n2: h.view((0, n), (n, n)).into_owned(),
                    n3: h.view((n, 0), (n, n)).into_owned(),
                    n4: h.view((n, n), (n, n)).into_owned(),
                }
            }
        }
    }
}
