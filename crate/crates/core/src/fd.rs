//! Central finite differences.
//!
//! First derivatives use the step `h = max(1e-6, 1e-7 |x_j|)` per
//! coordinate; second derivatives nest two central differences with step
//! `sqrt(h)`.

use nalgebra::{DMatrix, DVector};

pub fn step(value: f64) -> f64 {
    (1e-7 * value.abs()).max(1e-6)
}

pub fn second_step(value: f64) -> f64 {
    libm::sqrt(step(value))
}

/// Jacobian `d map / d x` of shape `(out_dim, x.len())`.
pub fn jacobian(
    map: impl Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    out_dim: usize,
) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(out_dim, x.len());
    let mut probe = x.clone();
    for j in 0..x.len() {
        let h = step(x[j]);
        probe[j] = x[j] + h;
        let plus = map(&probe);
        probe[j] = x[j] - h;
        let minus = map(&probe);
        probe[j] = x[j];
        jac.column_mut(j).copy_from(&((plus - minus) / (2.0 * h)));
    }
    jac
}

pub fn gradient(map: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>) -> DVector<f64> {
    let mut grad = DVector::zeros(x.len());
    let mut probe = x.clone();
    for j in 0..x.len() {
        let h = step(x[j]);
        probe[j] = x[j] + h;
        let plus = map(&probe);
        probe[j] = x[j] - h;
        let minus = map(&probe);
        probe[j] = x[j];
        grad[j] = (plus - minus) / (2.0 * h);
    }
    grad
}

/// Symmetric Hessian of a scalar map by nested central differences.
pub fn hessian(map: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>) -> DMatrix<f64> {
    let dim = x.len();
    let mut hess = DMatrix::zeros(dim, dim);
    let mut probe = x.clone();
    let f0 = map(x);
    for i in 0..dim {
        let hi = second_step(x[i]);
        probe[i] = x[i] + hi;
        let fp = map(&probe);
        probe[i] = x[i] - hi;
        let fm = map(&probe);
        probe[i] = x[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in 0..i {
            let hj = second_step(x[j]);
            let mut eval = |si: f64, sj: f64| {
                probe[i] = x[i] + si * hi;
                probe[j] = x[j] + sj * hj;
                let v = map(&probe);
                probe[i] = x[i];
                probe[j] = x[j];
                v
            };
            let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                / (4.0 * hi * hj);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn gradient_of_quadratic() {
        let g = gradient(|x| x[0] * x[0] + 3.0 * x[0] * x[1], &dvector![1.0, 2.0]);
        assert!((g[0] - 8.0).abs() < 1e-8);
        assert!((g[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn hessian_of_cubic() {
        let h = hessian(|x| x[0] * x[0] * x[0] + x[0] * x[1], &dvector![2.0, -1.0]);
        assert!((h[(0, 0)] - 12.0).abs() < 1e-5);
        assert!((h[(0, 1)] - 1.0).abs() < 1e-6);
        assert_eq!(h[(0, 1)], h[(1, 0)]);
        assert!(h[(1, 1)].abs() < 1e-6);
    }

    #[test]
    fn jacobian_of_linear_map_is_exact() {
        let j = jacobian(|x| dvector![2.0 * x[0] - x[1], x[1]], &dvector![0.3, 0.7], 2);
        assert!((j[(0, 0)] - 2.0).abs() < 1e-9);
        assert!((j[(0, 1)] + 1.0).abs() < 1e-9);
        assert!((j[(1, 1)] - 1.0).abs() < 1e-9);
    }
}
