//! Dense helpers on top of nalgebra, plus the two factorizations nalgebra
//! does not ship: an eigenvalue-ordered Schur form and a bordered banded LU.

mod banded;
mod schur;

pub use banded::{BandedLu, BorderedBandSystem};
pub use schur::{ordered_schur, OrderedSchur};

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;

/// Modulus of a complex number.
pub fn cabs(z: C64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// Maximum absolute row sum.
pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn vec_inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// `max |a_ij - a_ji|`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..i {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Singular values in decreasing order.
pub fn singular_values(a: &DMatrix<f64>) -> DVector<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let mut s = a.clone().svd(false, false).singular_values;
    s.as_mut_slice()
        .sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    s
}

/// Numerical rank: singular values above `rtol * sigma_max`.
pub fn rank(a: &DMatrix<f64>, rtol: f64) -> usize {
    let s = singular_values(a);
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rtol * smax).count()
}

/// Reciprocal 2-norm condition number, `sigma_min / sigma_max`.
pub fn rcond(a: &DMatrix<f64>) -> f64 {
    let s = singular_values(a);
    if s.is_empty() {
        return 0.0;
    }
    let smax = s[0];
    let smin = s[s.len() - 1];
    if smax == 0.0 || !smax.is_finite() {
        0.0
    } else {
        smin / smax
    }
}

/// Extreme eigenvalues `(min, max)` of the symmetric part of `a`.
pub fn sym_eig_range(a: &DMatrix<f64>) -> (f64, f64) {
    let ev = symmetrize(a).symmetric_eigen().eigenvalues;
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// LU solve returning `None` for singular or non-finite results.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let x = a.clone().lu().solve(b)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

pub fn solve_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let x = a.clone().lu().solve(b)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

pub fn inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let x = a.clone().try_inverse()?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues(a: &DMatrix<f64>) -> alloc::vec::Vec<C64> {
    if a.nrows() == 0 {
        return alloc::vec::Vec::new();
    }
    let schur = ordered_schur(a, |_| true);
    schur.eigenvalues
}

/// Largest real part of the spectrum.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> f64 {
    eigenvalues(a)
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Stacks `a` over `b`.
pub fn vstack(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(a.len() + b.len());
    out.rows_mut(0, a.len()).copy_from(a);
    out.rows_mut(a.len(), b.len()).copy_from(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn inf_norm_is_max_row_sum() {
        let a = dmatrix![1.0, -2.0; 3.0, 0.5];
        assert_eq!(inf_norm(&a), 3.5);
    }

    #[test]
    fn rank_of_zero_matrix_is_zero() {
        assert_eq!(rank(&DMatrix::zeros(3, 2), 1e-12), 0);
        assert_eq!(rank(&DMatrix::identity(3, 3), 1e-12), 3);
    }

    #[test]
    fn rcond_of_identity_is_one() {
        assert!((rcond(&DMatrix::identity(4, 4)) - 1.0).abs() < 1e-15);
        assert_eq!(rcond(&dmatrix![1.0, 1.0; 1.0, 1.0]), 0.0);
    }
}
