#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use turnpike_core::{Extremal, LinearQuadratic, Problem};

/// Exact solution of the LQ extremal boundary value problem
/// `Z' = M Z + c` with linear terminal conditions, sampled on a uniform grid.
///
/// The horizon is cut into segments of length at most one; the unknowns are
/// `Z` at every segment start plus the boundary multiplier, so every
/// propagator `exp(M s)` stays well conditioned even for long horizons.
pub fn lq_oracle(p: &Problem, horizon: f64, steps: usize) -> Extremal {
    let lq: &LinearQuadratic = p.linear_quadratic().expect("LQ problem");
    let (n, k) = (p.n(), p.k());
    let u_inv = lq.u_inv().clone();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&lq.a);
    m.view_mut((0, n), (n, n)).copy_from(&(&lq.b * &u_inv * lq.b.transpose()));
    m.view_mut((n, 0), (n, n)).copy_from(&lq.q);
    m.view_mut((n, n), (n, n)).copy_from(&(-lq.a.transpose()));
    let mut c = DVector::zeros(2 * n);
    c.rows_mut(0, n).copy_from(&(&lq.b * &lq.ud));
    c.rows_mut(n, n).copy_from(&(-(&lq.q * &lq.xd)));
    let z_bar = m.clone().lu().solve(&(-&c)).expect("static point");

    let zero = DVector::zeros(n);
    let (rx, ry) = p.terminal_jacobians(&zero, &zero);
    let r0 = -p.terminal_residual(&zero, &zero);

    let segments = (horizon.ceil() as usize).clamp(1, steps);
    let bounds: Vec<usize> = (0..=segments).map(|j| j * steps / segments).collect();
    let h = horizon / steps as f64;
    let dz = 2 * n;
    let dim = segments * dz + dz + k;
    // unknowns: Y_j = Z(t_j) - Z_bar for j = 0..=segments, then Gamma
    let mut a = DMatrix::zeros(dim, dim);
    let mut b = DVector::zeros(dim);
    let mut row = 0;
    for j in 0..segments {
        let len = (bounds[j + 1] - bounds[j]) as f64 * h;
        let phi = (&m * len).exp();
        a.view_mut((row, j * dz), (dz, dz)).copy_from(&phi);
        for i in 0..dz {
            a[(row + i, (j + 1) * dz + i)] = -1.0;
        }
        row += dz;
    }
    let last = segments * dz;
    let g = segments * dz + dz;
    // R_x x0 + R_y xT = r0
    a.view_mut((row, 0), (k, n)).copy_from(&rx);
    a.view_mut((row, last), (k, n)).copy_from(&ry);
    b.rows_mut(row, k)
        .copy_from(&(&r0 - &rx * z_bar.rows(0, n) - &ry * z_bar.rows(0, n)));
    row += k;
    // -lambda0 - R_x^T Gamma = 0
    for i in 0..n {
        a[(row + i, n + i)] = -1.0;
    }
    a.view_mut((row, g), (n, k)).copy_from(&(-rx.transpose()));
    b.rows_mut(row, n).copy_from(&z_bar.rows(n, n));
    row += n;
    // lambdaT - R_y^T Gamma = 0
    for i in 0..n {
        a[(row + i, last + n + i)] = 1.0;
    }
    a.view_mut((row, g), (n, k)).copy_from(&(-ry.transpose()));
    b.rows_mut(row, n).copy_from(&(-z_bar.rows(n, n)));
    let sol = a.lu().solve(&b).expect("oracle system");

    let step = (&m * h).exp();
    let mut t = Vec::with_capacity(steps + 1);
    let mut x = Vec::with_capacity(steps + 1);
    let mut lambda = Vec::with_capacity(steps + 1);
    let mut u = Vec::with_capacity(steps + 1);
    for j in 0..segments {
        let mut y = sol.rows(j * dz, dz).into_owned();
        let end = if j + 1 == segments { bounds[j + 1] + 1 } else { bounds[j + 1] };
        for i in bounds[j]..end {
            let z = &z_bar + &y;
            let li = z.rows(n, n).into_owned();
            t.push(if i == steps { horizon } else { i as f64 * h });
            u.push(&lq.ud + &u_inv * (lq.b.transpose() * &li));
            x.push(z.rows(0, n).into_owned());
            lambda.push(li);
            y = &step * y;
        }
    }
    Extremal {
        t,
        x,
        lambda,
        u,
        gamma: sol.rows(g, k).into_owned(),
        boundary_residual: 0.0,
        iterations: 0,
    }
}
