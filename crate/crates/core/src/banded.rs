//! Banded LU factorization with partial pivoting (LAPACK `gbtf2` layout).

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("zero pivot in column {column} of a {n}x{n} banded matrix")]
pub struct SingularMatrix {
    pub column: usize,
    pub n: usize,
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Storage is column-major with `2 kl + ku + 1` rows per column; the top `kl`
/// rows hold fill-in created by pivoting.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ldab,
            ab: vec![0.0; ldab * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        self.kl + self.ku + i - j + j * self.ldab
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i <= j + self.kl && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` to entry `(i, j)`; panics outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.ab[k] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    /// Mutable storage of column `j`; entry `(i, j)` sits at offset `kl + ku + i - j`.
    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        let start = j * self.ldab;
        &mut self.ab[start..start + self.ldab]
    }

    /// Splits the storage into per-column slices for parallel assembly.
    pub fn columns_mut(&mut self) -> std::slice::ChunksMut<'_, f64> {
        self.ab.chunks_mut(self.ldab)
    }

    pub fn row_offset(&self) -> usize {
        self.kl + self.ku
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for (i, yi) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yi += self.ab[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    pub fn factor(mut self) -> Result<BandLu, SingularMatrix> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let mut ipiv = vec![0usize; n];
        // clear fill-in rows in case the matrix was reused
        for j in 0..n {
            let start = j * self.ldab;
            self.ab[start..start + kl].iter_mut().for_each(|v| *v = 0.0);
        }
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = self.ab[self.idx(j, j)].abs();
            for t in 1..=km {
                let v = self.ab[self.idx(j + t, j)].abs();
                if v > best {
                    best = v;
                    jp = t;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 || !best.is_finite() {
                return Err(SingularMatrix { column: j, n });
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let a = self.idx(j, c);
                    let b = self.idx(j + jp, c);
                    self.ab.swap(a, b);
                }
            }
            if km > 0 {
                let inv = 1.0 / self.ab[self.idx(j, j)];
                let base = self.idx(j + 1, j);
                for v in &mut self.ab[base..base + km] {
                    *v *= inv;
                }
                for c in j + 1..=ju {
                    let t = self.ab[self.idx(j, c)];
                    if t != 0.0 {
                        let dst = self.idx(j + 1, c);
                        for r in 0..km {
                            let l = self.ab[base + r];
                            self.ab[dst + r] -= l * t;
                        }
                    }
                }
            }
        }
        Ok(BandLu { m: self, ipiv })
    }
}

/// Factorization `P A = L U` of a [`BandMatrix`].
#[derive(Clone, Debug)]
pub struct BandLu {
    m: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn n(&self) -> usize {
        self.m.n
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.m.n;
        let kl = self.m.kl;
        let kv = self.m.kl + self.m.ku;
        assert_eq!(b.len(), n);
        for j in 0..n.saturating_sub(1) {
            let km = kl.min(n - 1 - j);
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
            let bj = b[j];
            if bj != 0.0 {
                let base = self.m.idx(j + 1, j);
                for r in 0..km {
                    b[j + 1 + r] -= self.m.ab[base + r] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.m.ab[self.m.idx(j, j)];
            let bj = b[j];
            if bj != 0.0 {
                let lo = j.saturating_sub(kv);
                for i in lo..j {
                    b[i] -= self.m.ab[self.m.idx(i, j)] * bj;
                }
            }
        }
    }

    /// Product of the diagonal of `U` is `±det A`; returns `(sign, log|det|)`.
    pub fn log_det(&self) -> (f64, f64) {
        let mut sign = 1.0;
        let mut log = 0.0;
        for j in 0..self.m.n {
            let u = self.m.ab[self.m.idx(j, j)];
            if u < 0.0 {
                sign = -sign;
            }
            if self.ipiv[j] != j {
                sign = -sign;
            }
            log += u.abs().ln();
        }
        (sign, log)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())
                .unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        for k in (0..n).rev() {
            for j in k + 1..n {
                b[k] -= a[k][j] * b[j];
            }
            b[k] /= a[k][k];
        }
        b
    }

    #[test]
    fn matches_dense_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, kl, ku) in &[(1, 0, 0), (5, 1, 1), (30, 3, 5), (40, 7, 2), (25, 6, 6)] {
            let mut m = BandMatrix::zeros(n, kl, ku);
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if m.in_band(i, j) {
                        // weak diagonal forces pivoting
                        let v: f64 = rng.gen_range(-1.0..1.0) * if i == j { 0.1 } else { 1.0 };
                        m.set(i, j, v);
                        dense[i][j] = v;
                    }
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let want = dense_solve(dense, b.clone());
            let mut x = b.clone();
            let check = m.clone();
            m.factor().unwrap().solve(&mut x);
            for (a, w) in x.iter().zip(&want) {
                assert!((a - w).abs() < 1e-9 * (1.0 + w.abs()), "{a} vs {w}");
            }
            let r = check.matvec(&x);
            for (ri, bi) in r.iter().zip(&b) {
                assert!((ri - bi).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn singular_is_reported() {
        let m = BandMatrix::zeros(4, 1, 1);
        assert_eq!(m.factor().unwrap_err().column, 0);
    }
}
