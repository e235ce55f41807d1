//! Hamiltonian matrix of the linearized extremal flow and its splitting
//! into stable and antistable parts through the two extremal solutions of
//! the algebraic Riccati equation
//! `X A + A^T X - X B H_uu^{-1} B^T X - W = 0`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, inf_norm, ordered_schur, symmetrize, C64};
use crate::model::LinearizationData;

/// Eigenvalues closer than this to the imaginary axis make `M` non-hyperbolic.
pub const HYPERBOLICITY_TOL: f64 = 1e-8;

/// Reciprocal condition of the leading invariant-subspace block below which
/// the subspace is not treated as a graph over the state space.
pub const GRAPH_RCOND_MIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub m: DMatrix<f64>,
    /// `B H_uu^{-1} B^T`; the upper right block of `M` is its negative.
    pub b_huu_inv_bt: DMatrix<f64>,
}

impl HamiltonianMatrix {
    pub fn n(&self) -> usize {
        self.m.nrows() / 2
    }

    /// `J M` with `J = [[0, I], [-I, 0]]`; symmetric exactly when `M` is
    /// Hamiltonian.
    pub fn j_times_m(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        out.view_mut((0, 0), (n, 2 * n))
            .copy_from(&self.m.view((n, 0), (n, 2 * n)));
        out.view_mut((n, 0), (n, 2 * n))
            .copy_from(&(-self.m.view((0, 0), (n, 2 * n))));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicSplitting {
    pub e_minus: DMatrix<f64>,
    pub e_plus: DMatrix<f64>,
    /// `[[I, I], [E_-, E_+]]`.
    pub p: DMatrix<f64>,
    pub acl_minus: DMatrix<f64>,
    pub acl_plus: DMatrix<f64>,
    /// Minus the spectral abscissa of `acl_minus`.
    pub c2: f64,
    pub warnings: Vec<String>,
}

impl HyperbolicSplitting {
    /// Half the decay rate, the value used in the transient part of the
    /// exponential estimates.
    pub fn conservative_rate(&self) -> f64 {
        0.5 * self.c2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<C64>,
    /// Largest distance from `-mu` to the spectrum, over all eigenvalues `mu`.
    pub pairing_error: f64,
    /// Smallest `|Re mu|`.
    pub margin: f64,
    pub has_complex: bool,
    /// `|J M - (J M)^T|_inf`.
    pub hamiltonian_defect: f64,
}

pub fn build_hamiltonian_matrix(
    d: &LinearizationData,
    huu: &DMatrix<f64>,
) -> Result<HamiltonianMatrix> {
    let n = d.a.nrows();
    let huu_inv = linalg::inverse(huu).ok_or(Error::LegendreViolated {
        condition: f64::INFINITY,
    })?;
    let bhb = symmetrize(&(&d.b * huu_inv * d.b.transpose()));
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&d.a);
    m.view_mut((0, n), (n, n)).copy_from(&(-&bhb));
    m.view_mut((n, 0), (n, n)).copy_from(&d.w);
    m.view_mut((n, n), (n, n)).copy_from(&(-d.a.transpose()));
    Ok(HamiltonianMatrix { m, b_huu_inv_bt: bhb })
}

pub fn verify_spectrum(h: &HamiltonianMatrix) -> SpectrumReport {
    let eigenvalues = linalg::eigenvalues(&h.m);
    let scale = inf_norm(&h.m).max(1.0);
    let pairing_error = eigenvalues
        .iter()
        .map(|mu| {
            eigenvalues
                .iter()
                .map(|nu| linalg::cabs(nu + mu))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let margin = eigenvalues
        .iter()
        .map(|mu| mu.re.abs())
        .fold(f64::INFINITY, f64::min);
    let has_complex = eigenvalues.iter().any(|mu| mu.im.abs() > 1e-10 * scale);
    let jm = h.j_times_m();
    SpectrumReport {
        eigenvalues,
        pairing_error,
        margin,
        has_complex,
        hamiltonian_defect: inf_norm(&(&jm - jm.transpose())),
    }
}

/// Graph `V_2 V_1^{-1}` of the invariant subspace spanned by the leading
/// `n` Schur vectors, with the reciprocal condition of `V_1`.
fn graph(z: &DMatrix<C64>, n: usize) -> (Option<DMatrix<C64>>, f64) {
    let v1 = z.view((0, 0), (n, n)).into_owned();
    let v2 = z.view((n, 0), (n, n)).into_owned();
    let s = v1.clone().singular_values();
    let smax = s.max();
    let rcond = if smax > 0.0 { s.min() / smax } else { 0.0 };
    if !(rcond >= GRAPH_RCOND_MIN) {
        return (None, rcond);
    }
    (v1.try_inverse().map(|inv| v2 * inv), rcond)
}

fn extremal_solution(
    m: &DMatrix<f64>,
    stable: bool,
    warnings: &mut Vec<String>,
) -> Result<DMatrix<f64>> {
    let n = m.nrows() / 2;
    let schur = ordered_schur(m, |mu| if stable { mu.re < 0.0 } else { mu.re > 0.0 });
    let margin = schur
        .eigenvalues
        .iter()
        .map(|mu| mu.re.abs())
        .fold(f64::INFINITY, f64::min);
    if !(margin >= HYPERBOLICITY_TOL) {
        return Err(Error::NonHyperbolic {
            margin,
            detail: format!("eigenvalue within {margin:e} of the imaginary axis"),
        });
    }
    if schur.selected != n {
        return Err(Error::NonHyperbolic {
            margin,
            detail: format!(
                "{} eigenvalues on the {} side, expected {n}",
                schur.selected,
                if stable { "stable" } else { "antistable" }
            ),
        });
    }
    let (e, rcond) = graph(&schur.z, n);
    let e = e.ok_or(Error::NotAGraph { rcond })?;
    let label = if stable { "E_minus" } else { "E_plus" };
    let imag = e.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let real = e.map(|v| v.re);
    let scale = real.amax().max(1.0);
    if imag > 1e-8 * scale {
        warnings.push(format!("{label} has imaginary residue {imag:e}"));
    }
    let asym = linalg::asymmetry(&real);
    if asym > 1e-6 * scale {
        warnings.push(format!("{label} asymmetry {asym:e} before symmetrization"));
    }
    Ok(symmetrize(&real))
}

/// Largest state dimension for which the Kronecker form of the Newton
/// correction is assembled.
const REFINE_MAX_N: usize = 40;

fn are_matrix(h: &HamiltonianMatrix, a: &DMatrix<f64>, w: &DMatrix<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    x * a + a.transpose() * x - x * &h.b_huu_inv_bt * x - w
}

/// Newton steps on the Riccati equation starting from the Schur solution.
/// Each correction solves `D Acl + Acl^T D = -F(X)` with `Acl = A - G X`;
/// a step is kept only if it lowers the residual.
fn refine(h: &HamiltonianMatrix, d: &LinearizationData, mut x: DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    if n > REFINE_MAX_N {
        return x;
    }
    let mut f = are_matrix(h, &d.a, &d.w, &x);
    let mut res = inf_norm(&f);
    for _ in 0..4 {
        if res == 0.0 {
            break;
        }
        let acl = &d.a - &h.b_huu_inv_bt * &x;
        let eye = DMatrix::<f64>::identity(n, n);
        let k = acl.transpose().kronecker(&eye) + eye.kronecker(&acl.transpose());
        let rhs = DVector::from_iterator(n * n, f.iter().map(|v| -v));
        let Some(delta) = linalg::solve(&k, &rhs) else {
            break;
        };
        let next = symmetrize(&(&x + DMatrix::from_column_slice(n, n, delta.as_slice())));
        let f_next = are_matrix(h, &d.a, &d.w, &next);
        let r_next = inf_norm(&f_next);
        if !(r_next < res) {
            break;
        }
        x = next;
        f = f_next;
        res = r_next;
    }
    x
}

/// Computes `E_-` and `E_+` from the stable and antistable invariant
/// subspaces of `M` by ordered Schur decomposition.
pub fn solve_splitting(
    h: &HamiltonianMatrix,
    d: &LinearizationData,
    huu: &DMatrix<f64>,
) -> Result<HyperbolicSplitting> {
    let n = h.n();
    if huu.nrows() != d.b.ncols() {
        return Err(Error::DimensionMismatch {
            what: "H_uu",
            expected: d.b.ncols(),
            got: huu.nrows(),
        });
    }
    let mut warnings = Vec::new();
    let e_minus = refine(h, d, extremal_solution(&h.m, true, &mut warnings)?);
    let e_plus = refine(h, d, extremal_solution(&h.m, false, &mut warnings)?);
    let (lo, _) = linalg::sym_eig_range(&(-&e_minus));
    if !(lo > 0.0) {
        warnings.push(format!("E_minus is not negative definite (max eigenvalue {:e})", -lo));
    }
    let (lo, _) = linalg::sym_eig_range(&e_plus);
    if !(lo > 0.0) {
        warnings.push(format!("E_plus is not positive definite (min eigenvalue {lo:e})"));
    }
    let acl_minus = &d.a - &h.b_huu_inv_bt * &e_minus;
    let acl_plus = &d.a - &h.b_huu_inv_bt * &e_plus;
    let c2 = -linalg::spectral_abscissa(&acl_minus);
    if !(c2 > 0.0) {
        return Err(Error::NonHyperbolic {
            margin: c2,
            detail: format!("closed loop A - B H_uu^-1 B^T E_minus is not Hurwitz (abscissa {:e})", -c2),
        });
    }
    let mut p = DMatrix::identity(2 * n, 2 * n);
    p.view_mut((0, n), (n, n)).fill_with_identity();
    p.view_mut((n, 0), (n, n)).copy_from(&e_minus);
    p.view_mut((n, n), (n, n)).copy_from(&e_plus);
    Ok(HyperbolicSplitting {
        e_minus,
        e_plus,
        p,
        acl_minus,
        acl_plus,
        c2,
        warnings,
    })
}

/// `|X A + A^T X - X B H_uu^{-1} B^T X - W|_inf`.
pub fn are_residual(h: &HamiltonianMatrix, d: &LinearizationData, x: &DMatrix<f64>) -> f64 {
    inf_norm(&are_matrix(h, &d.a, &d.w, x))
}

/// Off-diagonal block norm of `P^{-1} M P`, and the distance of its diagonal
/// blocks from the closed-loop matrices, both in the infinity norm.
pub fn diagonalization_error(h: &HamiltonianMatrix, s: &HyperbolicSplitting) -> Option<(f64, f64)> {
    let n = h.n();
    let pmp = linalg::solve_matrix(&s.p, &(&h.m * &s.p))?;
    let off = inf_norm(&pmp.view((0, n), (n, n)).into_owned())
        .max(inf_norm(&pmp.view((n, 0), (n, n)).into_owned()));
    let diag = inf_norm(&(pmp.view((0, 0), (n, n)) - &s.acl_minus))
        .max(inf_norm(&(pmp.view((n, n), (n, n)) - &s.acl_plus)));
    Some((off, diag))
}

/// `|(E_+ - E_-) Acl_+ + Acl_-^T (E_+ - E_-)|_inf`.
pub fn coupling_residual(s: &HyperbolicSplitting) -> f64 {
    let gap = &s.e_plus - &s.e_minus;
    inf_norm(&(&gap * &s.acl_plus + s.acl_minus.transpose() * &gap))
}
