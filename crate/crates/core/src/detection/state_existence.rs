use serde::{Deserialize, Serialize};

use super::coords::HermitianBasis;
use super::feasibility::{DYKSTRA_MAX_ITER, DYKSTRA_STEP_TOL};
use super::Povm;
use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, RealMatrix};

/// Smallest eigenvalue for an element to count as positive definite.
pub const PD_TOL: f64 = 1e-9;
/// Largest accepted `max_i |Tr[rho M(i)] - P_i|` for a feasible verdict.
pub const STATE_RESIDUAL_TOL: f64 = 1e-6;
/// Margin a separating certificate must clear on both of its conditions.
pub const CERTIFICATE_TOL: f64 = 1e-8;
const TRACE_NOTE_TOL: f64 = 1e-6;
const GRADIENT_MAX_ITER: usize = 20_000;
const CERTIFICATE_CHECK_EVERY: usize = 50;

/// Does some PSD `rho` give `Tr[rho M(i)] = P_i` for every outcome? Rows of
/// `a` hold the coordinates of the elements in `basis`, so the traces are
/// `a x` for the coordinates `x` of `rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateExistenceProblem {
    pub povm: Povm,
    pub target: Vec<f64>,
    pub basis: HermitianBasis,
    pub a: RealMatrix,
}

impl StateExistenceProblem {
    pub fn new(povm: Povm, target: Vec<f64>) -> Result<Self> {
        if target.len() != povm.len() {
            return Err(Error::DimensionMismatch {
                expected: povm.len(),
                found: target.len(),
            });
        }
        if target.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("target distribution", format!("{target:?}")));
        }
        let basis = HermitianBasis::new(povm.dim());
        let rows: Vec<Vec<f64>> = povm.elements().iter().map(|m| basis.coords(m)).collect();
        let a = RealMatrix::from_rows(&rows);
        Ok(Self {
            povm,
            target,
            basis,
            a,
        })
    }

    /// `max_i |Tr[rho M(i)] - P_i|`, computed from the matrices directly.
    pub fn residual(&self, rho: &HermitianMatrix) -> f64 {
        self.povm
            .elements()
            .iter()
            .zip(&self.target)
            .map(|(m, p)| (rho.trace_product(m) - p).abs())
            .fold(0.0, f64::max)
    }

    /// `sum_i v_i M(i)`
    pub fn dual_matrix(&self, v: &[f64]) -> HermitianMatrix {
        let dim = self.povm.dim();
        self.povm
            .elements()
            .iter()
            .zip(v)
            .fold(HermitianMatrix::zeros(dim), |acc, (m, &vi)| acc.add(&m.scale(vi)))
    }

    /// Independent check of a separating vector: `sum_i v_i M(i)` PSD and
    /// `v . P < 0`, both with margin [`CERTIFICATE_TOL`].
    pub fn verify_certificate(&self, v: &[f64]) -> Option<(f64, f64)> {
        if v.len() != self.target.len() {
            return None;
        }
        let min_eig = self.dual_matrix(v).min_eigenvalue();
        let v_dot_p: f64 = v.iter().zip(&self.target).map(|(a, b)| a * b).sum();
        (min_eig >= -CERTIFICATE_TOL && v_dot_p < -CERTIFICATE_TOL).then_some((min_eig, v_dot_p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum StateVerdict {
    Feasible {
        rho: HermitianMatrix,
        residual: f64,
        trace: f64,
        /// Set when the trace differs from 1, which the cone test does not impose.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
    Certificate {
        v: Vec<f64>,
        /// Smallest eigenvalue of `sum_i v_i M(i)`.
        min_eigenvalue: f64,
        v_dot_p: f64,
    },
    Unknown {
        reason: String,
    },
}

fn psd_coords(basis: &HermitianBasis, x: &[f64]) -> Vec<f64> {
    basis.coords(&basis.matrix(x).psd_projection())
}

fn max_step(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Dykstra projections between `{x : a x = P}` and the PSD cone, started at
/// zero. Returns the best PSD iterate by residual.
fn alternating_projections(problem: &StateExistenceProblem) -> (HermitianMatrix, f64) {
    let a = &problem.a;
    let a_pinv = a.pseudo_inverse();
    let d2 = problem.basis.len();
    let project_affine = |x: &[f64]| -> Vec<f64> {
        let r: Vec<f64> = a
            .mul_vec(x)
            .iter()
            .zip(&problem.target)
            .map(|(ax, p)| ax - p)
            .collect();
        x.iter().zip(a_pinv.mul_vec(&r)).map(|(xi, ci)| xi - ci).collect()
    };
    let mut x = vec![0.0; d2];
    let mut p = vec![0.0; d2];
    let mut q = vec![0.0; d2];
    let mut best = (problem.basis.matrix(&x), f64::INFINITY);
    for _ in 0..DYKSTRA_MAX_ITER {
        let xp: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let y = project_affine(&xp);
        p = xp.iter().zip(&y).map(|(a, b)| a - b).collect();
        let yq: Vec<f64> = y.iter().zip(&q).map(|(a, b)| a + b).collect();
        let next = psd_coords(&problem.basis, &yq);
        q = yq.iter().zip(&next).map(|(a, b)| a - b).collect();
        let step = max_step(&next, &x);
        x = next;
        let rho = problem.basis.matrix(&x);
        let r = problem.residual(&rho);
        if r < best.1 {
            best = (rho, r);
        }
        if step < DYKSTRA_STEP_TOL {
            break;
        }
    }
    best
}

/// Separating vector from the nearest point of the trace cone: minimizes
/// `|a x - P|^2` over PSD `x` by accelerated projected gradient, then takes
/// `v = a x - P`. Because the elements sum to the identity, adding `s` to
/// every entry of `v` adds `s I` to the dual matrix, which absorbs small
/// negative eigenvalues left by the finite number of steps.
fn separating_vector(problem: &StateExistenceProblem) -> Option<(Vec<f64>, f64, f64)> {
    let a = &problem.a;
    let at = a.transpose();
    // |a|_F^2 bounds the gradient's Lipschitz constant
    let fro: f64 = (0..a.rows()).map(|i| a.row(i).iter().map(|x| x * x).sum::<f64>()).sum();
    let step = 1.0 / fro.max(f64::MIN_POSITIVE);
    let d2 = problem.basis.len();
    let p_sum: f64 = problem.target.iter().sum();
    let mut x = vec![0.0; d2];
    let mut z = x.clone();
    let mut momentum = 1.0f64;
    for it in 1..=GRADIENT_MAX_ITER {
        let r: Vec<f64> = a
            .mul_vec(&z)
            .iter()
            .zip(&problem.target)
            .map(|(ax, p)| ax - p)
            .collect();
        let grad = at.mul_vec(&r);
        let moved: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi - step * gi).collect();
        let next = psd_coords(&problem.basis, &moved);
        let next_m = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        let beta = (momentum - 1.0) / next_m;
        z = next.iter().zip(&x).map(|(n, o)| n + beta * (n - o)).collect();
        x = next;
        momentum = next_m;
        if it % CERTIFICATE_CHECK_EVERY != 0 && it != GRADIENT_MAX_ITER {
            continue;
        }
        let mut v: Vec<f64> = a
            .mul_vec(&x)
            .iter()
            .zip(&problem.target)
            .map(|(ax, p)| ax - p)
            .collect();
        let min_eig = problem.dual_matrix(&v).min_eigenvalue();
        if min_eig < 0.0 && p_sum > 0.0 {
            let shift = -min_eig;
            v.iter_mut().for_each(|vi| *vi += shift);
        }
        if let Some((m, vp)) = problem.verify_certificate(&v) {
            return Some((v, m, vp));
        }
    }
    None
}

/// Decides whether the target is the trace pattern of some PSD operator.
/// The search runs only when an element is positive definite, which keeps
/// the cone of trace patterns closed so that infeasibility always has a
/// separating certificate. Both verdicts are re-verified before return; if
/// neither verifies the result is `Unknown`.
pub fn state_exists_for_povm(problem: &StateExistenceProblem) -> StateVerdict {
    let has_pd = problem
        .povm
        .elements()
        .iter()
        .any(|m| m.min_eigenvalue() > PD_TOL);
    if !has_pd {
        return StateVerdict::Unknown {
            reason: "no measurement element is positive definite".into(),
        };
    }
    let (rho, _) = alternating_projections(problem);
    let residual = problem.residual(&rho);
    if residual < STATE_RESIDUAL_TOL && rho.min_eigenvalue() >= -CERTIFICATE_TOL {
        let trace = rho.trace_re();
        let note = ((trace - 1.0).abs() > TRACE_NOTE_TOL).then(|| {
            format!("operator has trace {trace}; only cone membership is tested")
        });
        return StateVerdict::Feasible {
            rho,
            residual,
            trace,
            note,
        };
    }
    match separating_vector(problem) {
        Some((v, min_eigenvalue, v_dot_p)) => StateVerdict::Certificate {
            v,
            min_eigenvalue,
            v_dot_p,
        },
        None => StateVerdict::Unknown {
            reason: format!("no verified state or certificate (best residual {residual:.3e})"),
        },
    }
}

impl StateVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, StateVerdict::Feasible { .. })
    }

    pub fn is_certificate(&self) -> bool {
        matches!(self, StateVerdict::Certificate { .. })
    }
}
