use alloc::vec::Vec;
use nalgebra::{Complex, DMatrix};

use super::C64;

/// Complex Schur form `A = Z T Z^H` whose leading diagonal entries are the
/// selected eigenvalues.
#[derive(Debug, Clone)]
pub struct OrderedSchur {
    pub z: DMatrix<C64>,
    pub t: DMatrix<C64>,
    /// Diagonal of `t`, in order.
    pub eigenvalues: Vec<C64>,
    /// Number of leading eigenvalues satisfying the selector.
    pub selected: usize,
}

/// Computes the real Schur form of `a`, splits its 2x2 blocks with unitary
/// rotations, then bubbles the eigenvalues accepted by `select` to the top.
///
/// The first `selected` columns of `z` span the invariant subspace of `a`
/// associated with those eigenvalues.
pub fn ordered_schur(a: &DMatrix<f64>, select: impl Fn(C64) -> bool) -> OrderedSchur {
    let dim = a.nrows();
    let (q, t_real) = a.clone().schur().unpack();
    let mut z: DMatrix<C64> = q.map(|v| Complex::new(v, 0.0));
    let mut t: DMatrix<C64> = t_real.map(|v| Complex::new(v, 0.0));

    // split the remaining 2x2 diagonal blocks
    let mut i = 0;
    while i + 1 < dim {
        let sub = t[(i + 1, i)].re;
        let scale = t[(i, i)].re.abs() + t[(i + 1, i + 1)].re.abs();
        if sub.abs() > f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
            split_block(&mut t, &mut z, i);
            i += 2;
        } else {
            t[(i + 1, i)] = Complex::new(0.0, 0.0);
            i += 1;
        }
    }
    for r in 1..dim {
        for c in 0..r {
            t[(r, c)] = Complex::new(0.0, 0.0);
        }
    }

    // bubble sort: move every selected eigenvalue above the unselected ones
    let mut selected = 0;
    for k in 0..dim {
        if select(t[(k, k)]) {
            let mut j = k;
            while j > selected {
                swap_adjacent(&mut t, &mut z, j - 1);
                j -= 1;
            }
            selected += 1;
        }
    }

    let eigenvalues = (0..dim).map(|k| t[(k, k)]).collect();
    OrderedSchur {
        z,
        t,
        eigenvalues,
        selected,
    }
}

/// Applies `T <- G^H T G` and `Z <- Z G` for the rotation `G = [g1, g2]`
/// acting on coordinates `(k, k+1)`, where `g2 = (-conj(g1_1), conj(g1_0))`.
fn apply_rotation(t: &mut DMatrix<C64>, z: &mut DMatrix<C64>, k: usize, c0: C64, c1: C64) {
    let dim = t.nrows();
    // columns of G
    let g00 = c0;
    let g10 = c1;
    let g01 = -c1.conj();
    let g11 = c0.conj();
    // rows k, k+1 : T <- G^H T
    for col in 0..dim {
        let a = t[(k, col)];
        let b = t[(k + 1, col)];
        t[(k, col)] = g00.conj() * a + g10.conj() * b;
        t[(k + 1, col)] = g01.conj() * a + g11.conj() * b;
    }
    // columns k, k+1 : T <- T G, Z <- Z G
    for row in 0..dim {
        let a = t[(row, k)];
        let b = t[(row, k + 1)];
        t[(row, k)] = a * g00 + b * g10;
        t[(row, k + 1)] = a * g01 + b * g11;
        let a = z[(row, k)];
        let b = z[(row, k + 1)];
        z[(row, k)] = a * g00 + b * g10;
        z[(row, k + 1)] = a * g01 + b * g11;
    }
}

fn normalized(v0: C64, v1: C64) -> (C64, C64) {
    let nrm = libm::sqrt(v0.norm_sqr() + v1.norm_sqr());
    (v0 / nrm, v1 / nrm)
}

/// Triangularizes the 2x2 diagonal block at `(k, k)`.
fn split_block(t: &mut DMatrix<C64>, z: &mut DMatrix<C64>, k: usize) {
    let p = t[(k, k)];
    let q = t[(k, k + 1)];
    let r = t[(k + 1, k)];
    let s = t[(k + 1, k + 1)];
    let half_tr = (p + s) * 0.5;
    let det = p * s - q * r;
    let disc = half_tr * half_tr - det;
    let root = csqrt(disc);
    let mu = half_tr + root;
    // eigenvector of the block for mu, from whichever row is better scaled
    let (v0, v1) = if (mu - p).norm_sqr() + q.norm_sqr() >= (mu - s).norm_sqr() + r.norm_sqr() {
        (q, mu - p)
    } else {
        (mu - s, r)
    };
    if v0.norm_sqr() + v1.norm_sqr() == 0.0 {
        return;
    }
    let (c0, c1) = normalized(v0, v1);
    apply_rotation(t, z, k, c0, c1);
    t[(k + 1, k)] = Complex::new(0.0, 0.0);
}

/// Exchanges the diagonal entries at `k` and `k+1` of an upper triangular `t`.
fn swap_adjacent(t: &mut DMatrix<C64>, z: &mut DMatrix<C64>, k: usize) {
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let c = t[(k, k + 1)];
    // eigenvector of [[a, c], [0, b]] for eigenvalue b
    let (v0, v1) = (c, b - a);
    if v0.norm_sqr() + v1.norm_sqr() == 0.0 {
        return;
    }
    let (c0, c1) = normalized(v0, v1);
    apply_rotation(t, z, k, c0, c1);
    t[(k + 1, k)] = Complex::new(0.0, 0.0);
    t[(k, k)] = b;
    t[(k + 1, k + 1)] = a;
}

fn csqrt(w: C64) -> C64 {
    let r = libm::sqrt(w.norm_sqr());
    let re = libm::sqrt(((r + w.re) * 0.5).max(0.0));
    let im_mag = libm::sqrt(((r - w.re) * 0.5).max(0.0));
    Complex::new(re, if w.im < 0.0 { -im_mag } else { im_mag })
}
