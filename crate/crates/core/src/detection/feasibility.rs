use serde::{Deserialize, Serialize};

use super::coords::HermitianBasis;
use super::{DetectionProblem, Povm};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityState, HermitianMatrix, RealMatrix};

pub const DYKSTRA_MAX_ITER: usize = 50_000;
/// Stop once successive iterates move less than this (max norm).
pub const DYKSTRA_STEP_TOL: f64 = 1e-10;
/// Infeasibility radius below which a measurement is returned.
pub const FEASIBLE_T: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityResult {
    /// Smallest infeasibility radius found.
    pub t_star: f64,
    /// Present when `t_star <= FEASIBLE_T`.
    pub povm: Option<Povm>,
    pub iterations: usize,
}

/// Block layout: outcome `i` owns coordinates `i*d2 .. (i+1)*d2`.
struct Layout {
    basis: HermitianBasis,
    outcomes: usize,
}

impl Layout {
    fn d2(&self) -> usize {
        self.basis.len()
    }

    fn block<'a>(&self, x: &'a [f64], i: usize) -> &'a [f64] {
        &x[i * self.d2()..(i + 1) * self.d2()]
    }

    fn elements(&self, x: &[f64]) -> Vec<HermitianMatrix> {
        (0..self.outcomes).map(|i| self.basis.matrix(self.block(x, i))).collect()
    }

    fn project_psd(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outcomes)
            .flat_map(|i| {
                let m = self.basis.matrix(self.block(x, i)).psd_projection();
                self.basis.coords(&m)
            })
            .collect()
    }
}

/// `max(trace residual, negative eigenvalues, completeness residual)` for
/// a candidate measurement.
fn infeasibility(elements: &[HermitianMatrix], rhos: [&DensityState; 2], prob: &DetectionProblem) -> f64 {
    let dim = rhos[0].dim();
    let mut t: f64 = 0.0;
    let mut total = ComplexMatrix::zeros(dim);
    for (i, m) in elements.iter().enumerate() {
        for (h, p) in [&prob.p0, &prob.p1].into_iter().enumerate() {
            t = t.max((rhos[h].hermitian().trace_product(m) - p[i]).abs());
        }
        t = t.max(-m.min_eigenvalue());
        total = &total + m;
    }
    t.max(total.max_abs_diff(&ComplexMatrix::identity(dim)))
}

/// `S^{-1/2} M(i) S^{-1/2}` with `S = sum_i M(i)`: exact completeness,
/// PSD preserved.
fn renormalize(elements: &[HermitianMatrix]) -> Option<Vec<HermitianMatrix>> {
    let dim = elements[0].dim();
    let total = elements
        .iter()
        .fold(HermitianMatrix::zeros(dim), |acc, m| acc.add(m));
    if total.min_eigenvalue() <= 0.0 {
        return None;
    }
    let inv_sqrt = total.map_spectrum(|l| 1.0 / l.sqrt());
    Some(
        elements
            .iter()
            .map(|m| m.psd_projection().congruence(&inv_sqrt))
            .collect(),
    )
}

/// Searches for a measurement `M` with `Tr[rho_h M(i)] = p^h_i`, `M(i) >= 0`
/// and `sum_i M(i) = I`. The infeasibility radius `t` is the largest
/// violation of any of these; the search alternates Dykstra projections
/// between the affine constraints (least-squares projection when they are
/// inconsistent) and the product of PSD cones.
pub fn solve_p6_feasibility(
    rho0: &DensityState,
    rho1: &DensityState,
    prob: &DetectionProblem,
) -> Result<FeasibilityResult> {
    prob.validate()?;
    rho0.checked_same_dim(rho1)?;
    let k = rho0.dim();
    let n = prob.outcomes();
    let layout = Layout {
        basis: HermitianBasis::new(k),
        outcomes: n,
    };
    let d2 = layout.d2();
    let cols = n * d2;

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(2 * n + d2);
    let mut rhs = Vec::with_capacity(2 * n + d2);
    for (rho, p) in [(rho0, &prob.p0), (rho1, &prob.p1)] {
        let c = layout.basis.coords(rho);
        for (i, &target) in p.iter().enumerate() {
            let mut row = vec![0.0; cols];
            row[i * d2..(i + 1) * d2].copy_from_slice(&c);
            rows.push(row);
            rhs.push(target);
        }
    }
    let identity = layout.basis.coords(&ComplexMatrix::identity(k));
    for (b, &target) in identity.iter().enumerate() {
        let mut row = vec![0.0; cols];
        for i in 0..n {
            row[i * d2 + b] = 1.0;
        }
        rows.push(row);
        rhs.push(target);
    }
    let a = RealMatrix::from_rows(&rows);
    let a_pinv = a.pseudo_inverse();
    let project_affine = |x: &[f64]| -> Vec<f64> {
        let r: Vec<f64> = a.mul_vec(x).iter().zip(&rhs).map(|(ax, c)| ax - c).collect();
        let corr = a_pinv.mul_vec(&r);
        x.iter().zip(corr).map(|(xi, ci)| xi - ci).collect()
    };

    // start from the uninformative measurement I / n
    let start: Vec<f64> = (0..n).flat_map(|_| identity.iter().map(|c| c / n as f64)).collect();
    let mut x = start;
    let mut p = vec![0.0; cols];
    let mut q = vec![0.0; cols];
    let rhos = [rho0, rho1];
    let mut best_t = f64::INFINITY;
    let mut best_x = x.clone();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < DYKSTRA_MAX_ITER {
        iterations += 1;
        let xp: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let y = project_affine(&xp);
        p = xp.iter().zip(&y).map(|(a, b)| a - b).collect();
        let yq: Vec<f64> = y.iter().zip(&q).map(|(a, b)| a + b).collect();
        let next = layout.project_psd(&yq);
        q = yq.iter().zip(&next).map(|(a, b)| a - b).collect();
        let step = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = next;
        let t = infeasibility(&layout.elements(&x), rhos, prob);
        if t < best_t {
            best_t = t;
            best_x.clone_from(&x);
        }
        if step < DYKSTRA_STEP_TOL {
            converged = true;
            break;
        }
    }
    if !converged && best_t > FEASIBLE_T {
        return Err(Error::NotConverged {
            iterations,
            best_t,
        });
    }

    let mut t_star = best_t;
    let mut povm = None;
    if best_t <= FEASIBLE_T {
        if let Some(polished) = renormalize(&layout.elements(&best_x)) {
            let t = infeasibility(&polished, rhos, prob);
            if t <= FEASIBLE_T {
                t_star = t;
                povm = Povm::new(polished).ok();
            }
        }
    }
    Ok(FeasibilityResult {
        t_star,
        povm,
        iterations,
    })
}
