use alloc::boxed::Box;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::{HamiltonianBlocks, Model};
use crate::error::{Error, Result};
use crate::fd;
use crate::linalg::inverse;

pub type VectorField = Box<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type FieldJacobian = Box<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
/// `(x, lambda, u) -> d^2/dx^2 <lambda, f(x, u)>`.
pub type Curvature =
    Box<dyn Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// Control-affine dynamics `f(x, u) = f_0(x) + sum_i u_i f_i(x)` with the
/// quadratic running cost of [`super::LinearQuadratic`].
pub struct ControlAffineQuadratic {
    n: usize,
    drift: VectorField,
    inputs: Vec<VectorField>,
    drift_jacobian: Option<FieldJacobian>,
    input_jacobians: Option<Vec<FieldJacobian>>,
    curvature: Option<Curvature>,
    pub q: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub xd: DVector<f64>,
    pub ud: DVector<f64>,
    u_inv: DMatrix<f64>,
}

impl core::fmt::Debug for ControlAffineQuadratic {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ControlAffineQuadratic")
            .field("n", &self.n)
            .field("m", &self.inputs.len())
            .finish_non_exhaustive()
    }
}

impl ControlAffineQuadratic {
    pub fn new(
        drift: VectorField,
        inputs: Vec<VectorField>,
        q: DMatrix<f64>,
        u: DMatrix<f64>,
        xd: DVector<f64>,
        ud: DVector<f64>,
    ) -> Result<Self> {
        let n = q.nrows();
        let m = inputs.len();
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument("n and m must be at least 1".into()));
        }
        if q.shape() != (n, n) || u.shape() != (m, m) || xd.len() != n || ud.len() != m {
            return Err(Error::InvalidArgument(
                "weight dimensions inconsistent with the vector fields".into(),
            ));
        }
        let u_inv = inverse(&u).ok_or_else(|| Error::InvalidArgument("U is singular".into()))?;
        Ok(Self {
            n,
            drift,
            inputs,
            drift_jacobian: None,
            input_jacobians: None,
            curvature: None,
            q,
            u,
            xd,
            ud,
            u_inv,
        })
    }

    pub fn with_jacobians(mut self, drift: FieldJacobian, inputs: Vec<FieldJacobian>) -> Self {
        assert_eq!(inputs.len(), self.inputs.len(), "one Jacobian per input field");
        self.drift_jacobian = Some(drift);
        self.input_jacobians = Some(inputs);
        self
    }

    pub fn with_curvature(mut self, curvature: Curvature) -> Self {
        self.curvature = Some(curvature);
        self
    }

    fn input_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = self.inputs.iter().map(|f| f(x)).collect();
        DMatrix::from_columns(&cols)
    }

    fn state_jacobian(&self, x: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
        match (&self.drift_jacobian, &self.input_jacobians) {
            (Some(dj), Some(ij)) => {
                let mut jac = dj(x);
                for (i, j) in ij.iter().enumerate() {
                    jac += j(x) * u[i];
                }
                jac
            }
            _ => fd::jacobian(|v| self.dynamics(v, u), x, self.n),
        }
    }

    /// Column `i` is `grad_x <lambda, f_i(x)>`.
    fn input_gradients(&self, x: &DVector<f64>, lambda: &DVector<f64>) -> DMatrix<f64> {
        let m = self.inputs.len();
        let mut out = DMatrix::zeros(self.n, m);
        for i in 0..m {
            let col = match &self.input_jacobians {
                Some(ij) => ij[i](x).transpose() * lambda,
                None => fd::gradient(|v| lambda.dot(&(self.inputs[i])(v)), x),
            };
            out.column_mut(i).copy_from(&col);
        }
        out
    }
}

impl Model for ControlAffineQuadratic {
    fn state_dim(&self) -> usize {
        self.n
    }

    fn control_dim(&self) -> usize {
        self.inputs.len()
    }

    fn dynamics(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let mut out = (self.drift)(x);
        for (i, f) in self.inputs.iter().enumerate() {
            out += f(x) * u[i];
        }
        out
    }

    fn running_cost(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        let dx = x - &self.xd;
        let du = u - &self.ud;
        0.5 * (dx.dot(&(&self.q * &dx)) + du.dot(&(&self.u * &du)))
    }

    fn dynamics_jacobians(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        Some((self.state_jacobian(x, u), self.input_matrix(x)))
    }

    fn cost_gradients(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Option<(DVector<f64>, DVector<f64>)> {
        Some((&self.q * (x - &self.xd), &self.u * (u - &self.ud)))
    }

    fn hamiltonian_hessian(
        &self,
        x: &DVector<f64>,
        lambda: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Option<HamiltonianBlocks> {
        let curv = match &self.curvature {
            Some(c) => c(x, lambda, u),
            None => fd::hessian(|v| lambda.dot(&self.dynamics(v, u)), x),
        };
        Some(HamiltonianBlocks {
            hxx: curv - &self.q,
            hxl: self.state_jacobian(x, u),
            hxu: self.input_gradients(x, lambda),
            hlu: self.input_matrix(x),
            huu: -self.u.clone(),
        })
    }

    fn control_law(&self, x: &DVector<f64>, lambda: &DVector<f64>) -> Option<DVector<f64>> {
        let g = self.input_matrix(x).transpose() * lambda;
        Some(&self.ud + &self.u_inv * g)
    }
}
