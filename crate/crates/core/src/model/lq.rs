use alloc::format;
use nalgebra::{DMatrix, DVector};

use super::{HamiltonianBlocks, Model};
use crate::error::{Error, Result};
use crate::linalg::{asymmetry, inverse, sym_eig_range};

/// `f(x, u) = A x + B u`,
/// `f0(x, u) = 1/2 (x - xd)' Q (x - xd) + 1/2 (u - ud)' U (u - ud)`.
#[derive(Debug, Clone)]
pub struct LinearQuadratic {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub xd: DVector<f64>,
    pub ud: DVector<f64>,
    u_inv: DMatrix<f64>,
}

fn check_spd(name: &str, m: &DMatrix<f64>) -> Result<()> {
    let scale = m.amax().max(1.0);
    if asymmetry(m) > 1e-10 * scale {
        return Err(Error::InvalidArgument(format!("{name} is not symmetric")));
    }
    let (lo, _) = sym_eig_range(m);
    if !(lo > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "{name} is not positive definite (min eigenvalue {lo:e})"
        )));
    }
    Ok(())
}

impl LinearQuadratic {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        q: DMatrix<f64>,
        u: DMatrix<f64>,
        xd: DVector<f64>,
        ud: DVector<f64>,
    ) -> Result<Self> {
        let n = a.nrows();
        let m = b.ncols();
        let shape = |what: &'static str, got: (usize, usize), want: (usize, usize)| {
            if got != want {
                Err(Error::DimensionMismatch {
                    what,
                    expected: want.0 * want.1,
                    got: got.0 * got.1,
                })
            } else {
                Ok(())
            }
        };
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument("n and m must be at least 1".into()));
        }
        shape("A", a.shape(), (n, n))?;
        shape("B", b.shape(), (n, m))?;
        shape("Q", q.shape(), (n, n))?;
        shape("U", u.shape(), (m, m))?;
        shape("xd", xd.shape(), (n, 1))?;
        shape("ud", ud.shape(), (m, 1))?;
        let finite = a
            .iter()
            .chain(b.iter())
            .chain(q.iter())
            .chain(u.iter())
            .chain(xd.iter())
            .chain(ud.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("non-finite LQ data".into()));
        }
        check_spd("Q", &q)?;
        check_spd("U", &u)?;
        let u_inv = inverse(&u).ok_or_else(|| Error::InvalidArgument("U is singular".into()))?;
        Ok(Self {
            a,
            b,
            q,
            u,
            xd,
            ud,
            u_inv,
        })
    }

    pub fn u_inv(&self) -> &DMatrix<f64> {
        &self.u_inv
    }
}

impl Model for LinearQuadratic {
    fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    fn control_dim(&self) -> usize {
        self.b.ncols()
    }

    fn dynamics(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.b * u
    }

    fn running_cost(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        let dx = x - &self.xd;
        let du = u - &self.ud;
        0.5 * (dx.dot(&(&self.q * &dx)) + du.dot(&(&self.u * &du)))
    }

    fn dynamics_jacobians(
        &self,
        _x: &DVector<f64>,
        _u: &DVector<f64>,
    ) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        Some((self.a.clone(), self.b.clone()))
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
        _x: &DVector<f64>,
        _lambda: &DVector<f64>,
        _u: &DVector<f64>,
    ) -> Option<HamiltonianBlocks> {
        let n = self.state_dim();
        let m = self.control_dim();
        Some(HamiltonianBlocks {
            hxx: -self.q.clone(),
            hxl: self.a.clone(),
            hxu: DMatrix::zeros(n, m),
            hlu: self.b.clone(),
            huu: -self.u.clone(),
        })
    }

    fn control_law(&self, _x: &DVector<f64>, lambda: &DVector<f64>) -> Option<DVector<f64>> {
        Some(&self.ud + &self.u_inv * (self.b.transpose() * lambda))
    }

    fn as_linear_quadratic(&self) -> Option<&LinearQuadratic> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn rejects_indefinite_weight() {
        let err = LinearQuadratic::new(
            dmatrix![0.0],
            dmatrix![1.0],
            dmatrix![-1.0],
            dmatrix![1.0],
            dvector![0.0],
            dvector![0.0],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn rejects_asymmetric_weight() {
        let err = LinearQuadratic::new(
            DMatrix::zeros(2, 2),
            dmatrix![0.0; 1.0],
            dmatrix![1.0, 0.5; 0.0, 1.0],
            dmatrix![1.0],
            dvector![0.0, 0.0],
            dvector![0.0],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}
