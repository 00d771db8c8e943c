//! Dense LU factorization with partial pivoting.

use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    }

    pub fn lu(&self) -> Lu {
        Lu::factor(self.clone())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// `P A = L U` with unit lower `L`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
    /// max |U_ij| / max |A_ij|
    pub growth: f64,
    singular: bool,
}

impl Lu {
    pub fn factor(mut a: Matrix) -> Self {
        let n = a.n;
        let scale = a.max_abs();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        let mut umax = 0.0f64;
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs())).unwrap_or(k);
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let piv = a[(k, k)];
            if piv == 0.0 {
                singular = true;
                continue;
            }
            for i in (k + 1)..n {
                let f = a[(i, k)] / piv;
                a[(i, k)] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        let v = a[(k, j)];
                        a[(i, j)] -= f * v;
                    }
                }
            }
            for j in k..n {
                umax = umax.max(a[(k, j)].abs());
            }
        }
        let growth = if scale > 0.0 { umax / scale } else { 1.0 };
        Self { lu: a, perm, sign, growth, singular }
    }

    pub fn det(&self) -> f64 {
        if self.singular {
            return 0.0;
        }
        (0..self.lu.n).fold(self.sign, |d, i| d * self.lu[(i, i)])
    }

    /// Smallest |U_ii| relative to the largest; a cheap conditioning indicator.
    pub fn pivot_ratio(&self) -> f64 {
        let n = self.lu.n;
        if n == 0 {
            return 1.0;
        }
        let d: Vec<f64> = (0..n).map(|i| self.lu[(i, i)].abs()).collect();
        let hi = d.iter().cloned().fold(0.0, f64::max);
        let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi == 0.0 {
            0.0
        } else {
            lo / hi
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.lu.n;
        if self.singular {
            return Err(Error::Singular { s: f64::NAN });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            x[i] = (0..i).fold(x[i], |s, j| s - self.lu[(i, j)] * x[j]);
        }
        for i in (0..n).rev() {
            x[i] = ((i + 1)..n).fold(x[i], |s, j| s - self.lu[(i, j)] * x[j]) / self.lu[(i, i)];
        }
        Ok(x)
    }
}
