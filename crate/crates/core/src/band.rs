//! Symmetric positive definite band matrices and their Cholesky factors.
//!
//! Only the lower band is stored: entry `(i, j)` with `i - b <= j <= i` lives
//! at `data[i * (b + 1) + (i - j)]`.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    b: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, b: usize) -> Self {
        Self { n, b, data: vec![0.0; n * (b + 1)] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.b
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(i - j <= self.b, "entry ({i}, {j}) outside band {}", self.b);
        i * (self.b + 1) + (i - j)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        if hi - lo > self.b {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j);
        self.data[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j);
        self.data[k] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * (self.b + 1)..(i + 1) * (self.b + 1)];
            y[i] += row[0] * x[i];
            for d in 1..=self.b.min(i) {
                let a = row[d];
                if a != 0.0 {
                    y[i] += a * x[i - d];
                    y[i - d] += a * x[i];
                }
            }
        }
        y
    }

    /// Infinity norm.
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0_f64; self.n];
        for i in 0..self.n {
            let row = &self.data[i * (self.b + 1)..(i + 1) * (self.b + 1)];
            rows[i] += row[0].abs();
            for d in 1..=self.b.min(i) {
                rows[i] += row[d].abs();
                rows[i - d] += row[d].abs();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn cholesky(&self) -> Result<BandCholesky> {
        let (n, b) = (self.n, self.b);
        let w = b + 1;
        let mut l = self.data.clone();
        for i in 0..n {
            let lo = i.saturating_sub(b);
            for j in lo..=i {
                let kmin = lo.max(j.saturating_sub(b));
                let mut s = l[i * w + (i - j)];
                for k in kmin..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::SingularSystem(format!(
                            "non-positive pivot {s:e} at row {i} of {n}"
                        )));
                    }
                    l[i * w] = s.sqrt();
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Ok(BandCholesky { n, b, l })
    }
}

#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    b: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, b, w) = (self.n, self.b, self.b + 1);
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(b)..i {
                s -= self.l[i * w + (i - k)] * x[k];
            }
            x[i] = s / self.l[i * w];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + b + 1).min(n) {
                s -= self.l[k * w + (k - i)] * x[k];
            }
            x[i] = s / self.l[i * w];
        }
    }
}
