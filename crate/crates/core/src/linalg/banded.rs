use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Square banded matrix factored in place by Gaussian elimination with
/// partial pivoting.
///
/// Row `i` stores the absolute columns `[i - kl, i + kl + ku]`; the extra
/// `kl` super-diagonals hold fill-in created by row exchanges.
#[derive(Debug, Clone)]
pub struct BandedLu {
    dim: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    factored: bool,
}

impl BandedLu {
    pub fn zeros(dim: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            dim,
            kl,
            ku,
            width,
            data: vec![0.0; dim * width],
            pivots: (0..dim).collect(),
            factored: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let lo = i as isize - self.kl as isize;
        let off = j as isize - lo;
        (off >= 0 && (off as usize) < self.width).then(|| i * self.width + off as usize)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `v` to entry `(i, j)`. Panics when `(i, j)` lies outside the
    /// declared band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j).expect("band slot");
        self.data[s] += v;
    }

    /// Factors in place. Returns `false` when a pivot falls below
    /// `pivot_tol` in absolute value.
    pub fn factor(&mut self, pivot_tol: f64) -> bool {
        let n = self.dim;
        let reach = self.kl + self.ku;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > pivot_tol) || !best.is_finite() {
                return false;
            }
            self.pivots[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let sk = self.slot(k, j).expect("pivot row slot");
                    let sp = self.slot(p, j).expect("swap row slot");
                    self.data.swap(sk, sp);
                }
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last_row {
                let si = self.slot(i, k).expect("multiplier slot");
                let l = self.data[si] / pivot;
                self.data[si] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..=last_col {
                    let ukj = self.get(k, j);
                    if ukj != 0.0 {
                        let s = self.slot(i, j).expect("update slot");
                        self.data[s] -= l * ukj;
                    }
                }
            }
        }
        self.factored = true;
        true
    }

    /// Solves `A x = b` in place using the stored factors.
    #[allow(clippy::needless_range_loop)]
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert!(self.factored, "solve before factor");
        let n = self.dim;
        let reach = self.kl + self.ku;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    b[i] -= self.get(i, k) * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                acc -= self.get(k, j) * b[j];
            }
            b[k] = acc / self.get(k, k);
        }
    }
}

/// Linear system `[[K11, K12], [K21, K22]]` where `K11` is banded and the
/// border (last `nc` unknowns) is dense and small.
#[derive(Debug, Clone)]
pub struct BorderedBandSystem {
    pub band: BandedLu,
    pub k12: DMatrix<f64>,
    pub k21: DMatrix<f64>,
    pub k22: DMatrix<f64>,
}

impl BorderedBandSystem {
    pub fn zeros(band_dim: usize, border_dim: usize, kl: usize, ku: usize) -> Self {
        Self {
            band: BandedLu::zeros(band_dim, kl, ku),
            k12: DMatrix::zeros(band_dim, border_dim),
            k21: DMatrix::zeros(border_dim, band_dim),
            k22: DMatrix::zeros(border_dim, border_dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.band.dim() + self.k22.nrows()
    }

    /// Adds `v` to the global entry `(i, j)`; indices at or past the band
    /// dimension address the border.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let nb = self.band.dim();
        match (i < nb, j < nb) {
            (true, true) => self.band.add(i, j, v),
            (true, false) => self.k12[(i, j - nb)] += v,
            (false, true) => self.k21[(i - nb, j)] += v,
            (false, false) => self.k22[(i - nb, j - nb)] += v,
        }
    }

    /// Factors and solves by block elimination on the border. Returns `None`
    /// if the band or the border Schur complement is singular.
    pub fn solve(mut self, rhs: &DVector<f64>, pivot_tol: f64) -> Option<DVector<f64>> {
        let nb = self.band.dim();
        let nc = self.k22.nrows();
        if !self.band.factor(pivot_tol) {
            return None;
        }
        let mut z: Vec<f64> = rhs.rows(0, nb).iter().cloned().collect();
        self.band.solve_in_place(&mut z);
        let mut y = DMatrix::zeros(nb, nc);
        for c in 0..nc {
            let mut col: Vec<f64> = self.k12.column(c).iter().cloned().collect();
            self.band.solve_in_place(&mut col);
            y.column_mut(c).copy_from_slice(&col);
        }
        let z = DVector::from_vec(z);
        let border = if nc > 0 {
            let schur = &self.k22 - &self.k21 * &y;
            let r2 = rhs.rows(nb, nc) - &self.k21 * &z;
            super::solve(&schur, &r2)?
        } else {
            DVector::zeros(0)
        };
        let top = z - y * &border;
        let out = super::vstack(&top, &border);
        out.iter().all(|v| v.is_finite()).then_some(out)
    }
}
