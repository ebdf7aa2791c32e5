use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{ComplexMatrix, HermitianMatrix};

/// Orthonormal basis of the `k x k` Hermitian matrices under
/// `<A, B> = Re Tr[A^H B]`: diagonal units first, then for each `m < n`
/// the symmetric and antisymmetric off-diagonal pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<HermitianMatrix>,
}

impl HermitianBasis {
    pub fn new(dim: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut elements = Vec::with_capacity(dim * dim);
        for m in 0..dim {
            let mut e = ComplexMatrix::zeros(dim);
            e[(m, m)] = Complex64::new(1.0, 0.0);
            elements.push(HermitianMatrix::new(e).expect("real diagonal"));
        }
        for m in 0..dim {
            for n in m + 1..dim {
                let mut sym = ComplexMatrix::zeros(dim);
                sym[(m, n)] = Complex64::new(s, 0.0);
                sym[(n, m)] = Complex64::new(s, 0.0);
                elements.push(HermitianMatrix::new(sym).expect("symmetric"));
                let mut anti = ComplexMatrix::zeros(dim);
                anti[(m, n)] = Complex64::new(0.0, -s);
                anti[(n, m)] = Complex64::new(0.0, s);
                elements.push(HermitianMatrix::new(anti).expect("conjugate pair"));
            }
        }
        Self { dim, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of real coordinates, `dim^2`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    pub fn coords(&self, h: &ComplexMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| e.inner(h)).collect()
    }

    pub fn matrix(&self, coords: &[f64]) -> HermitianMatrix {
        let mut out = ComplexMatrix::zeros(self.dim);
        for (e, &x) in self.elements.iter().zip(coords) {
            if x != 0.0 {
                out = &out + &e.scale(x);
            }
        }
        HermitianMatrix::new(out).expect("real combination of Hermitian elements")
    }
}
