use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::jacobi::hestenes_svd;
use super::RANK_RTOL;

/// Rectangular real matrix, row-major. Used for the linear constraint
/// systems behind the feasibility solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &RealMatrix) -> RealMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = RealMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Moore-Penrose pseudo-inverse with relative singular value cut-off.
    pub fn pseudo_inverse(&self) -> RealMatrix {
        let columns: Vec<Vec<Complex64>> = (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .map(|i| Complex64::new(self.get(i, j), 0.0))
                    .collect()
            })
            .collect();
        let svd = hestenes_svd(&columns);
        let cutoff = RANK_RTOL * svd.sigma.first().copied().unwrap_or(0.0);
        let mut pinv = RealMatrix::zeros(self.cols, self.rows);
        for ((&s, u), v) in svd.sigma.iter().zip(&svd.u).zip(&svd.v) {
            if s <= cutoff || s == 0.0 {
                continue;
            }
            for i in 0..self.cols {
                let vi = v[i].re / s;
                if vi == 0.0 {
                    continue;
                }
                for j in 0..self.rows {
                    pinv.data[i * self.rows + j] += vi * u[j].re;
                }
            }
        }
        pinv
    }
}
