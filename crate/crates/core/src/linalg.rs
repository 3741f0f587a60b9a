//! Banded matrices with a partially pivoted LU factorization.
//!
//! Storage is row-major by diagonal offset. Each row keeps `kl` extra slots to
//! the right of the upper band so that row interchanges during factorization
//! never leave the stored window.

// Band sweeps index several arrays by the same row offset.
#![allow(clippy::needless_range_loop)]

use crate::error::LinalgError;

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
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return None;
        }
        Some(i * self.width + (j + self.kl - i))
    }

    /// Entry `(i, j)`; zero outside the stored band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `value` to entry `(i, j)`.
    ///
    /// # Panics
    /// If `(i, j)` lies outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let s = i * self.width + (j + self.kl - i);
        self.data[s] += value;
    }

    /// Overwrites entry `(i, j)`.
    ///
    /// # Panics
    /// If `(i, j)` lies outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let current = self.get(i, j);
        self.add(i, j, value - current);
    }

    /// Largest absolute stored entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Zeroes row `i` inside the band.
    pub fn clear_row(&mut self, i: usize) {
        let start = i * self.width;
        self.data[start..start + self.width].fill(0.0);
    }

    fn col_range(&self, i: usize) -> std::ops::Range<usize> {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku + 1).min(self.n);
        lo..hi
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.col_range(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for (i, xi) in x.iter().enumerate() {
            for j in self.col_range(i) {
                y[j] += self.get(i, j) * xi;
            }
        }
        y
    }

    /// LU factorization with partial pivoting restricted to the lower band.
    pub fn lu(&self) -> Result<BandLu, LinalgError> {
        let n = self.n;
        let kl = self.kl;
        let reach = kl + self.ku;
        let mut a = self.clone();
        let mut pivots = vec![0usize; n];
        let mut multipliers = vec![0.0; n * kl.max(1)];
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = scale * f64::EPSILON * 1e-3;

        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = a.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(LinalgError::Singular { pivot: k });
            }
            pivots[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let sk = a.slot(k, j).expect("pivot row slot");
                    let sp = a.slot(p, j).expect("pivot row slot");
                    a.data.swap(sk, sp);
                }
            }
            let pivot = a.get(k, k);
            for i in k + 1..=last_row {
                let si = a.slot(i, k).expect("lower band slot");
                let m = a.data[si] / pivot;
                a.data[si] = 0.0;
                multipliers[k * kl + (i - k - 1)] = m;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        let ukj = a.get(k, j);
                        if ukj != 0.0 {
                            let s = a.slot(i, j).expect("fill-in slot");
                            a.data[s] -= m * ukj;
                        }
                    }
                }
            }
        }
        Ok(BandLu {
            factors: a,
            pivots,
            multipliers,
        })
    }
}

/// Factors produced by [`BandMatrix::lu`].
#[derive(Debug, Clone)]
pub struct BandLu {
    factors: BandMatrix,
    pivots: Vec<usize>,
    multipliers: Vec<f64>,
}

impl BandLu {
    pub fn dim(&self) -> usize {
        self.factors.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.factors.n;
        let kl = self.factors.kl;
        let reach = kl + self.factors.ku;
        assert_eq!(rhs.len(), n);
        let mut b = rhs.to_vec();
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    b[i] -= self.multipliers[k * kl + (i - k - 1)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                acc -= self.factors.get(k, j) * b[j];
            }
            b[k] = acc / self.factors.get(k, k);
        }
        b
    }

    /// Solves `Aᵀ x = rhs` with the same factors.
    pub fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.factors.n;
        let kl = self.factors.kl;
        let reach = kl + self.factors.ku;
        assert_eq!(rhs.len(), n);
        let mut y = rhs.to_vec();
        // Uᵀ is lower triangular.
        for k in 0..n {
            let mut acc = y[k];
            for i in k.saturating_sub(reach)..k {
                acc -= self.factors.get(i, k) * y[i];
            }
            y[k] = acc / self.factors.get(k, k);
        }
        for k in (0..n).rev() {
            let mut acc = 0.0;
            for i in k + 1..=(k + kl).min(n - 1) {
                acc += self.multipliers[k * kl + (i - k - 1)] * y[i];
            }
            y[k] -= acc;
            y.swap(k, self.pivots[k]);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x = b.to_vec();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
                .unwrap();
            m.swap(k, p);
            x.swap(k, p);
            for i in k + 1..n {
                let f = m[i][k] / m[k][k];
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
                x[i] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
            x[k] = (x[k] - s) / m[k][k];
        }
        x
    }

    fn sample(n: usize, kl: usize, ku: usize) -> BandMatrix {
        let mut a = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                // deliberately small diagonal so pivoting is exercised
                let v = ((i * 7 + j * 3) % 11) as f64 - 5.0 + if i == j { 0.1 } else { 0.0 };
                a.add(i, j, v);
            }
        }
        a
    }

    #[test]
    fn lu_matches_dense_elimination() {
        let (n, kl, ku) = (23, 3, 2);
        let a = sample(n, kl, ku);
        let dense: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a.get(i, j)).collect()).collect();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = a.lu().unwrap().solve(&b);
        let xd = dense_solve(&dense, &b);
        for (p, q) in x.iter().zip(&xd) {
            assert!((p - q).abs() < 1e-9, "{p} vs {q}");
        }
        let r = a.matvec(&x);
        for (p, q) in r.iter().zip(&b) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn transpose_solve_inverts_transpose_product() {
        let (n, kl, ku) = (31, 5, 5);
        let a = sample(n, kl, ku);
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.37).cos()).collect();
        let x = a.lu().unwrap().solve_transpose(&b);
        let r = a.matvec_transpose(&x);
        for (p, q) in r.iter().zip(&b) {
            assert!((p - q).abs() < 1e-9, "{p} vs {q}");
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = BandMatrix::zeros(4, 1, 1);
        assert!(matches!(a.lu(), Err(LinalgError::Singular { .. })));
    }
}
