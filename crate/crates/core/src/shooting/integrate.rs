use alloc::vec::Vec;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, sym_eig_range, vec_inf_norm};
use crate::model::{hessian_blocks, ExtremalPoint, Problem};

/// `|z|_inf` above which an integration is declared to have blown up.
pub const BLOW_UP_BOUND: f64 = 1e8;

const CONTROL_TOL: f64 = 1e-12;
const CONTROL_MAX_ITER: usize = 50;

/// Solves `dH/du (x, lambda, u) = 0` for `u`.
///
/// Models with a closed-form control law use it directly; otherwise Newton
/// runs from `warm` on the exact `H_uu` and the root is checked for strict
/// negativity of `H_uu`.
pub fn pointwise_control(
    p: &Problem,
    x: &DVector<f64>,
    lambda: &DVector<f64>,
    warm: &DVector<f64>,
) -> Result<DVector<f64>> {
    let fail = |reason| Error::ControlSolve {
        x: x.iter().copied().collect(),
        lambda: lambda.iter().copied().collect(),
        reason,
    };
    if let Some(u) = p.model().control_law(x, lambda) {
        return if u.iter().all(|v| v.is_finite()) {
            Ok(u)
        } else {
            Err(fail("control law returned non-finite values"))
        };
    }
    let mut u = warm.clone();
    for _ in 0..CONTROL_MAX_ITER {
        let (_, hu) = p.hamiltonian_gradients(x, lambda, &u);
        let point = ExtremalPoint {
            x: x.clone(),
            lambda: lambda.clone(),
            u: u.clone(),
        };
        let huu = hessian_blocks(p, &point)
            .map_err(|_| fail("non-finite H_uu"))?
            .huu;
        if vec_inf_norm(&hu) <= CONTROL_TOL * (1.0 + u.amax()) {
            let (lo, _) = sym_eig_range(&(-&huu));
            return if lo > 0.0 {
                Ok(u)
            } else {
                Err(fail("H_uu is not negative definite at the root"))
            };
        }
        let step = linalg::solve(&huu, &(-hu)).ok_or_else(|| fail("singular H_uu"))?;
        u += step;
        if !u.iter().all(|v| v.is_finite()) {
            return Err(fail("Newton iterate is not finite"));
        }
    }
    Err(fail("Newton iteration limit reached"))
}

/// Right-hand side `(dH/dlambda, -dH/dx)` of the extremal flow at
/// `z = (x, lambda)`; updates `warm` with the control used.
fn extremal_field(p: &Problem, z: &DVector<f64>, warm: &mut DVector<f64>) -> Result<DVector<f64>> {
    let n = p.n();
    let x = z.rows(0, n).into_owned();
    let lambda = z.rows(n, n).into_owned();
    let u = pointwise_control(p, &x, &lambda, warm)?;
    let dx = p.dynamics(&x, &u);
    let (hx, _) = p.hamiltonian_gradients(&x, &lambda, &u);
    *warm = u;
    Ok(linalg::vstack(&dx, &(-hx)))
}

/// Fixed-step classical RK4 for `z = (x, lambda)` from `t_from` to `t_to`
/// (which may lie before `t_from`). Returns the `steps + 1` nodes.
pub fn integrate_extremal(
    p: &Problem,
    z_start: &DVector<f64>,
    t_from: f64,
    t_to: f64,
    steps: usize,
) -> Result<Vec<DVector<f64>>> {
    let n = p.n();
    if z_start.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            what: "z_start",
            expected: 2 * n,
            got: z_start.len(),
        });
    }
    if steps == 0 || t_from == t_to {
        return Err(Error::InvalidArgument(
            "integration needs at least one step over a nonempty interval".into(),
        ));
    }
    let h = (t_to - t_from) / steps as f64;
    let mut warm = DVector::zeros(p.m());
    let mut path = Vec::with_capacity(steps + 1);
    let mut z = z_start.clone();
    path.push(z.clone());
    for i in 0..steps {
        let k1 = extremal_field(p, &z, &mut warm)?;
        let k2 = extremal_field(p, &(&z + &k1 * (0.5 * h)), &mut warm)?;
        let k3 = extremal_field(p, &(&z + &k2 * (0.5 * h)), &mut warm)?;
        let k4 = extremal_field(p, &(&z + &k3 * h), &mut warm)?;
        z += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        if !z.iter().all(|v| v.is_finite()) || z.amax() > BLOW_UP_BOUND {
            return Err(Error::BlowUp {
                t: t_from + h * (i + 1) as f64,
            });
        }
        path.push(z.clone());
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry;
    use crate::static_solver::solve_static;
    use nalgebra::dvector;

    #[test]
    fn example_one_control_is_second_costate() {
        let p = registry::oscillator_lq();
        let u = pointwise_control(&p, &dvector![0.3, 2.0], &dvector![-1.5, 0.75], &dvector![0.0]).unwrap();
        assert_eq!(u, dvector![0.75]);
    }

    #[test]
    fn static_point_is_a_fixed_point() {
        for p in [registry::oscillator_lq(), registry::cubic_oscillator()] {
            let s = solve_static(&p, &ExtremalPoint::zeros(2, 1)).unwrap();
            let u = pointwise_control(&p, &s.x_bar, &s.lambda_bar, &DVector::zeros(1)).unwrap();
            assert!((u - &s.u_bar).amax() < 1e-10);
            let z = linalg::vstack(&s.x_bar, &s.lambda_bar);
            let path = integrate_extremal(&p, &z, 0.0, 25.0, 500).unwrap();
            for node in &path {
                assert!((node - &z).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn forward_then_backward_returns() {
        let p = registry::oscillator_lq();
        let z0 = dvector![0.0, 0.0, -3.0, 2.0];
        let fwd = integrate_extremal(&p, &z0, 0.0, 2.0, 2000).unwrap();
        let back = integrate_extremal(&p, fwd.last().unwrap(), 2.0, 0.0, 2000).unwrap();
        assert!((back.last().unwrap() - &z0).amax() < 1e-9);
    }

    #[test]
    fn cubic_term_blows_up() {
        let p = registry::cubic_oscillator();
        let err = integrate_extremal(&p, &dvector![1.0, 3.0, 0.0, 0.0], 0.0, 5.0, 500).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }));
    }
}
