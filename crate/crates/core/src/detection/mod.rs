//! Binary hypothesis testing with classical likelihoods, projection-valued
//! measurements and general positive-operator-valued measurements, plus the
//! ordered-measurement construction and two convex feasibility solvers.

mod coords;
mod feasibility;
pub mod reference;
mod state_existence;

use serde::{Deserialize, Serialize};

use crate::empirics::OrderedDistribution;
use crate::error::{Error, Result};
use crate::linalg::{is_psd, ComplexMatrix, DensityState, HermitianMatrix};

pub use coords::HermitianBasis;
pub use feasibility::{
    solve_p6_feasibility, FeasibilityResult, DYKSTRA_MAX_ITER, DYKSTRA_STEP_TOL, FEASIBLE_T,
};
pub use state_existence::{
    state_exists_for_povm, StateExistenceProblem, StateVerdict, CERTIFICATE_TOL, PD_TOL,
    STATE_RESIDUAL_TOL,
};

/// Allowed negative eigenvalue of a measurement element.
pub const POVM_PSD_TOL: f64 = 1e-9;
/// Allowed entrywise deviation of the element sum from the identity.
pub const POVM_SUM_TOL: f64 = 1e-8;
pub const DISTRIBUTION_TOL: f64 = 1e-10;
/// Idempotence and orthogonality tolerance for projection-valued measures.
pub const PVM_TOL: f64 = 1e-8;
/// Tolerance on the optimality operator inequalities.
pub const HOLEVO_TOL: f64 = 1e-8;

/// Priors `[zeta_0, zeta_1]` and the observation distributions under each
/// hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionProblem {
    pub priors: [f64; 2],
    pub p0: Vec<f64>,
    pub p1: Vec<f64>,
}

fn check_probability_vector(what: &'static str, p: &[f64], tol: f64) -> Result<()> {
    if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::invalid(what, format!("{p:?} has entries outside [0, 1]")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::invalid(what, format!("sums to {total}")));
    }
    Ok(())
}

impl DetectionProblem {
    pub fn new(priors: [f64; 2], p0: Vec<f64>, p1: Vec<f64>) -> Result<Self> {
        let p = Self { priors, p0, p1 };
        p.validate()?;
        Ok(p)
    }

    pub fn from_distribution(dist: &OrderedDistribution, priors: [f64; 2]) -> Result<Self> {
        Self::new(priors, dist.p0.clone(), dist.p1.clone())
    }

    pub fn validate(&self) -> Result<()> {
        check_probability_vector("priors", &self.priors, DISTRIBUTION_TOL)?;
        if self.p0.len() != self.p1.len() {
            return Err(Error::DimensionMismatch {
                expected: self.p0.len(),
                found: self.p1.len(),
            });
        }
        if self.p0.len() < 2 {
            return Err(Error::invalid("detection problem", "needs at least two outcomes"));
        }
        check_probability_vector("distribution under h=0", &self.p0, DISTRIBUTION_TOL)?;
        check_probability_vector("distribution under h=1", &self.p1, DISTRIBUTION_TOL)
    }

    pub fn outcomes(&self) -> usize {
        self.p0.len()
    }

    /// Per-outcome `(zeta_0 p0_i, zeta_1 p1_i)`: the error incurred by
    /// deciding 1 and by deciding 0.
    pub fn weighted(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.p0
            .iter()
            .zip(&self.p1)
            .map(|(&a, &b)| (self.priors[0] * a, self.priors[1] * b))
    }
}

/// Decide 1 when its error contribution does not exceed that of deciding 0,
/// so ties go to 1.
fn decide_one(cost_of_one: f64, cost_of_zero: f64) -> bool {
    cost_of_one <= cost_of_zero
}

/// `sum_i min(zeta_0 p0_i, zeta_1 p1_i)`
pub fn bayes_error(priors: [f64; 2], p0: &[f64], p1: &[f64]) -> f64 {
    p0.iter()
        .zip(p1)
        .map(|(&a, &b)| (priors[0] * a).min(priors[1] * b))
        .sum()
}

/// Positive-operator-valued measure on a finite outcome set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmRepr", into = "PovmRepr")]
pub struct Povm {
    elements: Vec<HermitianMatrix>,
}

#[derive(Serialize, Deserialize)]
struct PovmRepr {
    elements: Vec<HermitianMatrix>,
}

impl TryFrom<PovmRepr> for Povm {
    type Error = Error;

    fn try_from(r: PovmRepr) -> Result<Self> {
        Povm::new(r.elements)
    }
}

impl From<Povm> for PovmRepr {
    fn from(p: Povm) -> Self {
        PovmRepr { elements: p.elements }
    }
}

impl Povm {
    pub fn new(elements: Vec<HermitianMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .map(|e| e.dim())
            .ok_or_else(|| Error::invalid("measurement", "no elements"))?;
        let mut total = ComplexMatrix::zeros(dim);
        for (i, e) in elements.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.dim(),
                });
            }
            let min = e.min_eigenvalue();
            if min < -POVM_PSD_TOL {
                return Err(Error::invalid(
                    "measurement",
                    format!("element {} has eigenvalue {min:.3e}", i + 1),
                ));
            }
            total = &total + e;
        }
        let dev = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if dev > POVM_SUM_TOL {
            return Err(Error::invalid(
                "measurement",
                format!("elements sum to the identity only within {dev:.3e}"),
            ));
        }
        Ok(Self { elements })
    }

    /// Rank-one projections onto the standard basis of `C^n`.
    pub fn canonical(n: usize) -> Self {
        let elements = (0..n)
            .map(|i| {
                let mut d = vec![0.0; n];
                d[i] = 1.0;
                HermitianMatrix::from_diagonal(&d)
            })
            .collect();
        Self { elements }
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<HermitianMatrix> {
        self.elements
    }

    /// Elements idempotent and pairwise orthogonal.
    pub fn check_pvm(&self) -> Result<()> {
        for (i, a) in self.elements.iter().enumerate() {
            let dev = (&**a * &**a).max_abs_diff(a);
            if dev > PVM_TOL {
                return Err(Error::NotAPvm(format!(
                    "element {} is not idempotent (deviation {dev:.3e})",
                    i + 1
                )));
            }
            for (j, b) in self.elements.iter().enumerate().skip(i + 1) {
                let overlap = (&**a * &**b).max_abs();
                if overlap > PVM_TOL {
                    return Err(Error::NotAPvm(format!(
                        "elements {} and {} overlap ({overlap:.3e})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_pvm(&self) -> bool {
        self.check_pvm().is_ok()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// Risk operators: `w1 = zeta_0 rho_0` is charged when deciding 1 and
/// `w0 = zeta_1 rho_1` when deciding 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskPair {
    pub w1: HermitianMatrix,
    pub w0: HermitianMatrix,
}

impl RiskPair {
    pub fn new(w1: HermitianMatrix, w0: HermitianMatrix) -> Result<Self> {
        w1.checked_same_dim(&w0)?;
        for (name, w) in [("w1", &w1), ("w0", &w0)] {
            if !is_psd(w, POVM_PSD_TOL) {
                return Err(Error::invalid("risk operator", format!("{name} is not PSD")));
            }
        }
        Ok(Self { w1, w0 })
    }

    pub fn from_states(priors: [f64; 2], rho0: &DensityState, rho1: &DensityState) -> Result<Self> {
        check_probability_vector("priors", &priors, DISTRIBUTION_TOL)?;
        Self::new(rho0.hermitian().scale(priors[0]), rho1.hermitian().scale(priors[1]))
    }

    pub fn dim(&self) -> usize {
        self.w1.dim()
    }

    /// `(Tr[w1 m], Tr[w0 m])`
    pub fn costs(&self, m: &ComplexMatrix) -> (f64, f64) {
        (self.w1.trace_product(m), self.w0.trace_product(m))
    }
}

/// Detection operators, per-outcome decision weights and the error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSolution {
    /// Operator for deciding 1.
    pub pi1: HermitianMatrix,
    pub pi0: HermitianMatrix,
    /// Probability of deciding 1 on each outcome.
    pub policy: Vec<f64>,
    pub error: f64,
}

impl DetectionSolution {
    /// Error of an arbitrary policy on the same problem, for comparisons.
    pub fn policy_error(prob: &DetectionProblem, policy: &[f64]) -> f64 {
        prob.weighted()
            .zip(policy)
            .map(|((c1, c0), &b)| b * c1 + (1.0 - b) * c0)
            .sum()
    }
}

fn threshold_solution(risks: &RiskPair, elements: &[HermitianMatrix]) -> DetectionSolution {
    let dim = risks.dim();
    let mut pi1 = HermitianMatrix::zeros(dim);
    let mut policy = Vec::with_capacity(elements.len());
    let mut error = 0.0;
    for m in elements {
        let (c1, c0) = risks.costs(m);
        if decide_one(c1, c0) {
            pi1 = pi1.add(m);
            policy.push(1.0);
            error += c1;
        } else {
            policy.push(0.0);
            error += c0;
        }
    }
    let pi0 = HermitianMatrix::identity(dim).sub(&pi1);
    DetectionSolution {
        pi1,
        pi0,
        policy,
        error,
    }
}

/// Likelihood-ratio rule: decide 1 on outcome `i` when
/// `zeta_1 p1_i >= zeta_0 p0_i`.
pub fn classical_min_error(prob: &DetectionProblem) -> DetectionSolution {
    let policy: Vec<f64> = prob
        .weighted()
        .map(|(c1, c0)| if decide_one(c1, c0) { 1.0 } else { 0.0 })
        .collect();
    let n = prob.outcomes();
    let pi1 = HermitianMatrix::from_diagonal(&policy);
    let pi0 = HermitianMatrix::identity(n).sub(&pi1);
    DetectionSolution {
        pi1,
        pi0,
        policy,
        error: bayes_error(prob.priors, &prob.p0, &prob.p1),
    }
}

/// Diagonal states `diag(p^h)` and the standard-basis measurement, which
/// reproduce the classical problem exactly.
pub fn build_pvm_model(prob: &DetectionProblem) -> Result<(DensityState, DensityState, Povm)> {
    prob.validate()?;
    let rho0 = DensityState::new(HermitianMatrix::from_diagonal(&prob.p0))?;
    let rho1 = DensityState::new(HermitianMatrix::from_diagonal(&prob.p1))?;
    Ok((rho0, rho1, Povm::canonical(prob.outcomes())))
}

/// Two-dimensional realization of any problem: `rho_0 = e1 e1^H`,
/// `rho_1 = e2 e2^H`, `M(i) = diag(p0_i, p1_i)`.
pub fn two_level_realization(prob: &DetectionProblem) -> Result<(DensityState, DensityState, Povm)> {
    prob.validate()?;
    let rho0 = DensityState::new(HermitianMatrix::from_diagonal(&[1.0, 0.0]))?;
    let rho1 = DensityState::new(HermitianMatrix::from_diagonal(&[0.0, 1.0]))?;
    let elements = prob
        .p0
        .iter()
        .zip(&prob.p1)
        .map(|(&a, &b)| HermitianMatrix::from_diagonal(&[a, b]))
        .collect();
    Ok((rho0, rho1, Povm::new(elements)?))
}

/// Optimal detector measurable with respect to a projection-valued measure.
pub fn solve_pvm_detection(risks: &RiskPair, pvm: &Povm) -> Result<DetectionSolution> {
    pvm.check_dim(risks.dim())?;
    pvm.check_pvm()?;
    Ok(threshold_solution(risks, pvm.elements()))
}

/// Optimality test for a detector pair: `Y = w0 pi0 + w1 pi1` must be
/// self-adjoint with `w_i - Y` PSD for both hypotheses.
pub fn holevo_conditions_check(risks: &RiskPair, pi0: &HermitianMatrix, pi1: &HermitianMatrix) -> bool {
    holevo_violation(risks, pi0, pi1).is_some_and(|v| v <= HOLEVO_TOL)
}

/// Largest violation of the optimality conditions, `None` when the pair is
/// not a valid detector (dimensions, or `pi0 + pi1 != I`).
pub fn holevo_violation(risks: &RiskPair, pi0: &HermitianMatrix, pi1: &HermitianMatrix) -> Option<f64> {
    let dim = risks.dim();
    if pi0.dim() != dim || pi1.dim() != dim {
        return None;
    }
    if pi0.add(pi1).max_abs_diff(&ComplexMatrix::identity(dim)) > POVM_SUM_TOL {
        return None;
    }
    let y = &(&*risks.w0 * &**pi0) + &(&*risks.w1 * &**pi1);
    let asymmetry = y.max_abs_diff(&y.adjoint());
    let y = HermitianMatrix::new(y.hermitian_part()).expect("Hermitian part");
    let worst_eig = [&risks.w0, &risks.w1]
        .iter()
        .map(|w| (-w.sub(&y).min_eigenvalue()).max(0.0))
        .fold(0.0, f64::max);
    Some(asymmetry.max(worst_eig))
}

/// All outcome tuples (1-based) for measurements with the given outcome
/// counts, the first measurement varying slowest.
pub fn outcome_tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (1..=n).map(move |i| {
                    let mut t = prefix.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// Measurement of projection-valued measures one after another, with the
/// state updated after each. The element for outcomes `(i_1, ..., i_n)` is
/// `K^H K` with `K = mu_n(i_n) ... mu_1(i_1)`, i.e. the nested product
/// `mu_1 mu_2 ... mu_n ... mu_2 mu_1`. Elements follow [`outcome_tuples`].
pub fn order_povm(pvms: &[Povm]) -> Result<Povm> {
    let first = pvms.first().ok_or_else(|| Error::invalid("measurement order", "empty"))?;
    let dim = first.dim();
    for p in pvms {
        p.check_dim(dim)?;
        p.check_pvm()?;
    }
    let sizes: Vec<usize> = pvms.iter().map(Povm::len).collect();
    let elements = outcome_tuples(&sizes)
        .into_iter()
        .map(|tuple| {
            let k = tuple
                .iter()
                .zip(pvms)
                .fold(ComplexMatrix::identity(dim), |acc, (&i, p)| &*p.elements[i - 1] * &acc);
            HermitianMatrix::gram(&k)
        })
        .collect();
    Povm::new(elements)
}

const CLIP_TOL: f64 = 1e-10;

/// `Tr[rho M(i)]` for each element, with tiny negative roundoff clipped.
pub fn sequence_distribution(rho: &DensityState, povm: &Povm) -> Result<Vec<f64>> {
    povm.check_dim(rho.dim())?;
    Ok(povm
        .elements()
        .iter()
        .map(|m| {
            let p = rho.hermitian().trace_product(m);
            if (-CLIP_TOL..0.0).contains(&p) {
                0.0
            } else {
                p
            }
        })
        .collect())
}

/// Optimal randomized post-processing of a fixed measurement: decide 1 on
/// outcome `i` when `Tr[w1 M(i)] <= Tr[w0 M(i)]`.
pub fn solve_p5(risks: &RiskPair, povm: &Povm) -> Result<DetectionSolution> {
    povm.check_dim(risks.dim())?;
    Ok(threshold_solution(risks, povm.elements()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderError {
    pub order: String,
    pub error: f64,
}

/// Minimum error per measurement order, in input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderErrorTable {
    pub priors: [f64; 2],
    pub rows: Vec<OrderError>,
    /// Index of the smallest error (first on ties).
    pub best: usize,
}

impl OrderErrorTable {
    pub fn best_order(&self) -> &str {
        &self.rows[self.best].order
    }
}

/// For each order, the smallest error any detector achieves on that order's
/// outcome distribution.
pub fn min_error_over_orders(dists: &[OrderedDistribution], priors: [f64; 2]) -> Result<OrderErrorTable> {
    if dists.is_empty() {
        return Err(Error::invalid("orders", "no distributions given"));
    }
    check_probability_vector("priors", &priors, DISTRIBUTION_TOL)?;
    let mut rows = Vec::with_capacity(dists.len());
    let mut best = 0;
    for (i, d) in dists.iter().enumerate() {
        d.validate()?;
        let error = bayes_error(priors, &d.p0, &d.p1);
        if error < rows.get(best).map_or(f64::INFINITY, |r: &OrderError| r.error) {
            best = i;
        }
        rows.push(OrderError {
            order: d.order.clone(),
            error,
        });
    }
    Ok(OrderErrorTable { priors, rows, best })
}
