//! Dense complex linear algebra for the small operators used throughout the
//! crate (dimensions up to 16).

mod jacobi;
mod matrix;
mod real;

use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use matrix::{product_chain, ComplexMatrix, MatrixRepr};
pub use real::RealMatrix;

pub(crate) use jacobi::hestenes_svd;

/// Tolerated asymmetry when accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Default tolerance on the smallest eigenvalue of a PSD operator.
pub const PSD_TOL: f64 = 1e-10;
/// Relative singular value cut-off used to decide numerical rank.
pub const RANK_RTOL: f64 = 1e-8;

/// A Hermitian operator. Construction symmetrizes away the residual
/// asymmetry (at most [`HERMITIAN_TOL`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let defect = m.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NonHermitianInput {
                max_asymmetry: defect,
            });
        }
        Ok(Self(m.hermitian_part()))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self(ComplexMatrix::from_diagonal(diag))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Real trace.
    pub fn trace_re(&self) -> f64 {
        self.0.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (values, _) = eig_hermitian(self);
        values.last().copied().unwrap_or(0.0)
    }

    /// `f` applied to the spectrum: `V diag(f(lambda)) V^H`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let (values, vectors) = eig_hermitian(self);
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n);
        for (k, &lambda) in values.iter().enumerate() {
            let fl = f(lambda);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = vectors[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] += vik * vectors[(j, k)].conj();
                }
            }
        }
        HermitianMatrix(out.hermitian_part())
    }

    /// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
    pub fn psd_projection(&self) -> HermitianMatrix {
        self.map_spectrum(|l| l.max(0.0))
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix(self.0.scale(s))
    }

    /// `Re Tr[self * other]`, exact for Hermitian pairs.
    pub fn trace_product(&self, other: &ComplexMatrix) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.0[(i, j)] * other[(j, i)]).re;
            }
        }
        acc
    }

    /// `A^H A` for any square `A`.
    pub fn gram(a: &ComplexMatrix) -> HermitianMatrix {
        HermitianMatrix((&a.adjoint() * a).hermitian_part())
    }

    /// `A H A^H`.
    pub fn congruence(&self, a: &ComplexMatrix) -> HermitianMatrix {
        HermitianMatrix((&(a * &self.0) * &a.adjoint()).hermitian_part())
    }
}

impl Deref for HermitianMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl TryFrom<ComplexMatrix> for HermitianMatrix {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        HermitianMatrix::new(m)
    }
}

impl From<HermitianMatrix> for ComplexMatrix {
    fn from(h: HermitianMatrix) -> Self {
        h.0
    }
}

/// A density operator: PSD with unit trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityState(HermitianMatrix);

impl DensityState {
    pub const TRACE_TOL: f64 = 1e-10;

    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let trace = h.trace_re();
        if (trace - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::invalid(
                "density state",
                format!("trace {trace} differs from 1"),
            ));
        }
        let min = h.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::invalid(
                "density state",
                format!("minimum eigenvalue {min:.3e} is negative"),
            ));
        }
        Ok(Self(h))
    }

    /// Normalizes a PSD operator with positive trace.
    pub fn from_unnormalized(h: HermitianMatrix) -> Result<Self> {
        let trace = h.trace_re();
        if trace <= 0.0 || !trace.is_finite() {
            return Err(Error::invalid(
                "density state",
                format!("cannot normalize operator with trace {trace}"),
            ));
        }
        Self::new(h.scale(1.0 / trace))
    }

    /// `I / dim`
    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    /// `v v^H / |v|^2`
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm2 == 0.0 {
            return Err(Error::invalid("density state", "zero state vector"));
        }
        Ok(Self(HermitianMatrix(
            ComplexMatrix::outer(v).scale(1.0 / norm2),
        )))
    }

    /// Wraps an operator known to be PSD by construction, rescaling it to
    /// unit trace without re-running the spectral check.
    pub(crate) fn normalized_unchecked(h: HermitianMatrix) -> Self {
        let trace = h.trace_re();
        Self(h.scale(1.0 / trace))
    }

    #[cfg(test)]
    pub(crate) fn new_unchecked(h: HermitianMatrix) -> Self {
        Self(h)
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    /// `Tr[rho E]`
    pub fn probability(&self, event: &ComplexMatrix) -> f64 {
        self.0.trace_product(event)
    }
}

impl Deref for DensityState {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl TryFrom<ComplexMatrix> for DensityState {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        DensityState::new(HermitianMatrix::new(m)?)
    }
}

impl From<DensityState> for ComplexMatrix {
    fn from(s: DensityState) -> Self {
        s.0 .0
    }
}

/// An orthogonal projection: Hermitian and idempotent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct Projection(HermitianMatrix);

impl Projection {
    pub const IDEMPOTENCE_TOL: f64 = 1e-10;

    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let defect = (&*h * &*h).max_abs_diff(&h);
        if defect > Self::IDEMPOTENCE_TOL {
            return Err(Error::invalid(
                "projection",
                format!("P*P differs from P by {defect:.3e}"),
            ));
        }
        Ok(Self(h))
    }

    pub fn zero(dim: usize) -> Self {
        Self(HermitianMatrix::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(HermitianMatrix::identity(dim))
    }

    /// Projection onto the span of orthonormal vectors.
    pub fn onto_orthonormal(dim: usize, basis: &[Vec<Complex64>]) -> Self {
        let mut m = ComplexMatrix::zeros(dim);
        for v in basis {
            m = &m + &ComplexMatrix::outer(v);
        }
        Self(HermitianMatrix(m.hermitian_part()))
    }

    /// Rank-one projection onto `v` (normalized internally).
    pub fn rank_one(v: &[Complex64]) -> Result<Self> {
        let state = DensityState::pure(v)?;
        Ok(Self(state.0))
    }

    /// Rank-one projection on the real plane onto `(cos t, sin t)`.
    pub fn at_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(HermitianMatrix(ComplexMatrix::from_fn(2, |i, j| {
            let u = [c, s];
            Complex64::new(u[i] * u[j], 0.0)
        })))
    }

    /// Canonical basis projector `e_i e_i^H`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut diag = vec![0.0; dim];
        diag[i] = 1.0;
        Self(HermitianMatrix::from_diagonal(&diag))
    }

    /// `I - P`
    pub fn complement(&self) -> Projection {
        Projection(HermitianMatrix::identity(self.dim()).sub(&self.0))
    }

    pub fn rank(&self) -> usize {
        self.0.trace_re().round().max(0.0) as usize
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.0
    }
}

impl Deref for Projection {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl TryFrom<ComplexMatrix> for Projection {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Projection::new(HermitianMatrix::new(m)?)
    }
}

impl From<Projection> for ComplexMatrix {
    fn from(p: Projection) -> Self {
        p.0 .0
    }
}

/// Eigenvalues in descending order with orthonormal eigenvectors as the
/// columns of the returned matrix.
pub fn eig_hermitian(h: &HermitianMatrix) -> (Vec<f64>, ComplexMatrix) {
    jacobi::eigen_hermitian(h)
}

/// Eigen-decomposition of an arbitrary matrix that is expected to be
/// Hermitian; fails when the asymmetry exceeds [`HERMITIAN_TOL`].
pub fn eig_checked(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    Ok(eig_hermitian(&HermitianMatrix::new(m.clone())?))
}

pub fn is_psd(h: &HermitianMatrix, tol: f64) -> bool {
    h.min_eigenvalue() >= -tol
}

/// Orthogonal projection onto the null space of `m`; numerical rank uses
/// the relative cut-off [`RANK_RTOL`] on singular values.
pub fn projection_onto_nullspace(m: &ComplexMatrix) -> Projection {
    projection_onto_nullspace_with_floor(m, 0.0)
}

/// As [`projection_onto_nullspace`], but singular values at or below
/// `abs_floor` also count as zero. Useful when `m` is known to have norm at
/// most one and an all-roundoff matrix must be recognized as zero.
pub fn projection_onto_nullspace_with_floor(m: &ComplexMatrix, abs_floor: f64) -> Projection {
    let n = m.dim();
    let columns: Vec<Vec<Complex64>> = (0..n).map(|j| m.column(j)).collect();
    let svd = hestenes_svd(&columns);
    let cutoff = (RANK_RTOL * svd.sigma.first().copied().unwrap_or(0.0)).max(abs_floor);
    let null_basis: Vec<Vec<Complex64>> = svd
        .sigma
        .iter()
        .zip(&svd.v)
        .filter(|(&s, _)| s <= cutoff)
        .map(|(_, v)| v.clone())
        .collect();
    Projection::onto_orthonormal(n, &null_basis)
}

/// Numerical rank of `m` under [`RANK_RTOL`].
pub fn rank(m: &ComplexMatrix) -> usize {
    let columns: Vec<Vec<Complex64>> = (0..m.dim()).map(|j| m.column(j)).collect();
    let svd = hestenes_svd(&columns);
    let cutoff = RANK_RTOL * svd.sigma.first().copied().unwrap_or(0.0);
    svd.sigma.iter().filter(|&&s| s > cutoff).count()
}
