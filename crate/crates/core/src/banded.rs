//! Banded LU factorization with partial pivoting.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BandedError {
    #[error("matrix is singular at column {0}")]
    Singular(usize),
    #[error("right-hand side has length {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

/// Square matrix with `kl` sub- and `ku` super-diagonals. Storage reserves an
/// extra `kl` super-diagonals for the fill-in created by row interchanges.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j + self.kl < i + self.width, "({i}, {j}) outside the band");
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return 0.0;
        }
        self.data[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.index(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.index(i, j);
        self.data[k] += v;
    }

    /// y = A x, for checking.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + self.kl).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// In-place factorization; consumes the matrix.
    pub fn factor(mut self) -> Result<BandLu, BandedError> {
        let n = self.n;
        let reach = self.kl + self.ku;
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in (k + 1)..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(BandedError::Singular(k));
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
            let pivot = self.get(k, k);
            for i in (k + 1)..=last_row {
                let m = self.get(i, k) / pivot;
                if m == 0.0 {
                    continue;
                }
                self.set(i, k, m);
                for j in (k + 1)..=last_col {
                    let u = self.get(k, j);
                    if u != 0.0 {
                        self.add(i, j, -m * u);
                    }
                }
            }
        }
        Ok(BandLu { matrix: self, pivots })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    matrix: BandMatrix,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, BandedError> {
        let a = &self.matrix;
        let n = a.n;
        if rhs.len() != n {
            return Err(BandedError::Dimension { expected: n, got: rhs.len() });
        }
        let mut x = rhs.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in (k + 1)..=(k + a.kl).min(n - 1) {
                x[i] -= a.get(i, k) * xk;
            }
        }
        let reach = a.kl + a.ku;
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in (k + 1)..=(k + reach).min(n - 1) {
                s -= a.get(k, j) * x[j];
            }
            x[k] = s / a.get(k, k);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, kl: usize, ku: usize, seed: u64) -> BandMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                a.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        a
    }

    #[test]
    fn solves_random_band_systems() {
        for (seed, (kl, ku)) in [(1, (6, 7)), (2, (1, 1)), (3, (0, 3)), (4, (4, 0))].into_iter() {
            let n = 60;
            let a = random_band(n, kl, ku, seed);
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let b = a.mul_vec(&x);
            let sol = a.clone().factor().unwrap().solve(&b).unwrap();
            // backward error; triangular random matrices can be badly conditioned
            let back = a.mul_vec(&sol);
            let err = back.iter().zip(&b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "kl={kl} ku={ku} err={err}");
        }
    }

    #[test]
    fn zero_diagonal_needs_pivoting() {
        let mut a = BandMatrix::zeros(3, 1, 1);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        a.set(1, 2, 1.0);
        a.set(2, 1, 1.0);
        a.set(2, 2, 1.0);
        let x = a.factor().unwrap().solve(&[2.0, 4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14 && (x[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn singular_detected() {
        let a = BandMatrix::zeros(4, 1, 1);
        assert!(matches!(a.factor(), Err(BandedError::Singular(0))));
    }
}
