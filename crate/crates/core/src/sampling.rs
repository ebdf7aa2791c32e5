//! Random operators for probing and test generation. All generators take an
//! explicit RNG so callers control reproducibility.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::detection::Povm;
use crate::linalg::{ComplexMatrix, DensityState, HermitianMatrix, Projection};

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(standard_normal(rng), standard_normal(rng))
}

/// Ginibre matrix: i.i.d. complex Gaussian entries.
pub fn random_complex_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| random_complex(rng))
}

pub fn random_real_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| Complex64::new(standard_normal(rng), 0.0))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianMatrix {
    let a = random_complex_matrix(rng, dim);
    HermitianMatrix::new(a.hermitian_part()).expect("hermitian part is Hermitian")
}

/// Full-rank mixed state `G G^H / Tr[G G^H]`.
pub fn random_density_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityState {
    let g = random_complex_matrix(rng, dim);
    DensityState::from_unnormalized(HermitianMatrix::gram(&g.adjoint()))
        .expect("Gram matrix of a Gaussian matrix has positive trace")
}

/// Real symmetric mixed state.
pub fn random_real_density_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityState {
    let g = random_real_matrix(rng, dim);
    DensityState::from_unnormalized(HermitianMatrix::gram(&g.adjoint()))
        .expect("Gram matrix of a Gaussian matrix has positive trace")
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityState {
    let v: Vec<Complex64> = (0..dim).map(|_| random_complex(rng)).collect();
    DensityState::pure(&v).expect("Gaussian vector is nonzero")
}

/// Haar-ish unitary: orthonormalized Ginibre columns (modified Gram-Schmidt).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = random_complex_matrix(rng, dim);
    let basis = gram_schmidt((0..dim).map(|j| g.column(j)).collect());
    ComplexMatrix::from_fn(dim, |i, j| basis[j][i])
}

/// Projection of the given rank onto a random subspace.
pub fn random_projection<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Projection {
    let u = random_unitary(rng, dim);
    let basis: Vec<Vec<Complex64>> = (0..rank.min(dim)).map(|j| u.column(j)).collect();
    Projection::onto_orthonormal(dim, &basis)
}

/// Pair of commuting projections sharing a random eigenbasis.
pub fn random_commuting_projections<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
) -> (Projection, Projection) {
    assert!(dim >= 2, "commuting proper projections need dim >= 2");
    let u = random_unitary(rng, dim);
    let pick = |rng: &mut R| -> Projection {
        loop {
            let cols: Vec<Vec<Complex64>> = (0..dim)
                .filter(|_| rng.gen_bool(0.5))
                .map(|j| u.column(j))
                .collect();
            if !cols.is_empty() && cols.len() < dim {
                return Projection::onto_orthonormal(dim, &cols);
            }
        }
    };
    let e = pick(rng);
    let f = pick(rng);
    (e, f)
}

/// Random POVM with `outcomes` full-rank elements on `C^dim`:
/// `M_i = S^{-1/2} G_i S^{-1/2}` with `S = sum G_i`.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Povm {
    let grams: Vec<HermitianMatrix> = (0..outcomes)
        .map(|_| HermitianMatrix::gram(&random_complex_matrix(rng, dim)))
        .collect();
    let total = grams
        .iter()
        .fold(HermitianMatrix::zeros(dim), |acc, g| acc.add(g));
    let inv_sqrt = total.map_spectrum(|l| 1.0 / l.sqrt());
    let elements = grams.iter().map(|g| g.congruence(&inv_sqrt)).collect();
    Povm::new(elements).expect("normalized Gram elements form a POVM")
}

pub fn random_probability_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| -rng.gen_range(f64::MIN_POSITIVE..1.0).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

pub(crate) fn gram_schmidt(mut vectors: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(vectors.len());
    for v in vectors.iter_mut() {
        for _ in 0..2 {
            for b in &basis {
                let proj: Complex64 = b.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= proj * bi;
                }
            }
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        basis.push(v.iter().map(|z| z / norm).collect());
    }
    basis
}
