//! Banded matrices and an LU factorization with partial pivoting.
//!
//! Finite element matrices of a rod with node-wise coordinate ordering are
//! banded: element `e` only couples the `6 (p + 1)` consecutive coordinates
//! of its nodes. Storage is row-major over the band and reserves `kl` extra
//! super-diagonals for fill-in from row interchanges.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, RodError};

#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    /// Zero `n x n` matrix with `kl` sub- and `ku` super-diagonals.
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.index(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` at `(i, j)`. Entries outside the declared band are a logic error.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let k = self.index(i, j);
        self.data[k] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + 1).min(self.n);
                (lo..hi).map(|j| self.data[self.index(i, j)] * x[j]).sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Principal submatrix on the increasing index set `keep`.
    pub fn principal_submatrix(&self, keep: &[usize]) -> BandedMatrix {
        let mut out = BandedMatrix::zeros(keep.len(), self.kl, self.ku);
        for (ri, &i) in keep.iter().enumerate() {
            for (rj, &j) in keep.iter().enumerate() {
                if self.in_band(i, j) {
                    let v = self.get(i, j);
                    if v != 0.0 {
                        out.add(ri, rj, v);
                    }
                }
            }
        }
        out
    }

    /// LU factorization with partial (row) pivoting.
    pub fn lu(mut self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let reach = self.ku + self.kl;
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.index(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.data[self.index(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(RodError::SingularMatrix(k));
            }
            pivots[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.index(k, j);
                    let b = self.index(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.index(k, k)];
            for i in k + 1..=last_row {
                let ik = self.index(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let kj = self.data[self.index(k, j)];
                        let ij = self.index(i, j);
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(BandedLu {
            factors: self,
            pivots,
        })
    }
}

/// Factors produced by [`BandedMatrix::lu`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    factors: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn dim(&self) -> usize {
        self.factors.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let f = &self.factors;
        let n = f.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + f.kl).min(n.saturating_sub(1)) {
                    b[i] -= f.data[f.index(i, k)] * bk;
                }
            }
        }
        let reach = f.ku + f.kl;
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                s -= f.data[f.index(k, j)] * b[j];
            }
            b[k] = s / f.data[f.index(k, k)];
        }
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        self.solve_in_place(x.as_mut_slice());
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded(n: usize, kl: usize, ku: usize, seed: u64) -> BandedMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = BandedMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                m.add(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        m
    }

    #[test]
    fn solve_matches_dense() {
        for (n, kl, ku, seed) in [
            (30, 5, 5, 1),
            (47, 11, 11, 2),
            (12, 2, 7, 3),
            (5, 17, 17, 4),
        ] {
            let m = random_banded(n, kl, ku, seed);
            let dense = m.to_dense();
            let b = DVector::from_fn(n, |i, _| (i as f64).sin());
            let x = m.clone().lu().unwrap().solve(&b);
            let x_ref = dense.clone().lu().solve(&b).unwrap();
            assert!((x - &x_ref).amax() < 1e-9 * x_ref.amax().max(1.0));
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let mut m = BandedMatrix::zeros(2, 1, 1);
        m.add(0, 1, 1.0);
        m.add(1, 0, 2.0);
        m.add(1, 1, 1.0);
        let x = m.lu().unwrap().solve(&DVector::from_vec(vec![3.0, 4.0]));
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn singular_is_reported() {
        let m = BandedMatrix::zeros(3, 1, 1);
        assert!(matches!(m.lu(), Err(RodError::SingularMatrix(0))));
    }

    #[test]
    fn submatrix_and_product() {
        let m = random_banded(10, 2, 3, 9);
        let keep = [1, 2, 5, 6, 9];
        let sub = m.principal_submatrix(&keep);
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                assert_eq!(sub.get(a, b), m.get(i, j));
            }
        }
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y = m.mul_vec(&x);
        let y_ref = m.to_dense() * DVector::from_vec(x);
        for i in 0..10 {
            assert!((y[i] - y_ref[i]).abs() < 1e-12);
        }
    }
}
