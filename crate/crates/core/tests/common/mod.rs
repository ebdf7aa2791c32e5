//! Oracles shared by the integration tests. They are written independently
//! of the library code they check.

#![allow(dead_code)]

use ncpt_core::decentralized_sim::ObserverSpec;
use ncpt_core::detection::{DetectionProblem, Povm, RiskPair};
use ncpt_core::linalg::{ComplexMatrix, HermitianMatrix};

/// Absorption probabilities of a sequential test computed by propagating
/// the log-likelihood-ratio distribution on a lattice of spacing `delta`.
#[derive(Debug, Clone, Copy)]
pub struct SprtOracle {
    pub p_decide_one: f64,
    /// Mass still between the thresholds at the sample cap.
    pub truncated: f64,
}

pub fn sprt_absorption(spec: &ObserverSpec, h: u8, delta: f64) -> SprtOracle {
    let lower = (spec.beta / (1.0 - spec.alpha)).ln();
    let upper = ((1.0 - spec.beta) / spec.alpha).ln();
    let pmf = if h == 0 { &spec.pmf_h0 } else { &spec.pmf_h1 };
    // interior lattice points k*delta with lower < k*delta < upper
    let k_lo = (lower / delta).floor() as i64 + 1;
    let k_hi = (upper / delta).ceil() as i64 - 1;
    let width = (k_hi - k_lo + 1) as usize;
    let steps: Vec<(Option<i64>, f64, f64)> = spec
        .pmf_h0
        .iter()
        .zip(&spec.pmf_h1)
        .zip(pmf)
        .filter(|(_, &w)| w > 0.0)
        .map(|((&a, &b), &w)| {
            let inc = (b / a).ln();
            if inc.is_finite() {
                (Some((inc / delta).round() as i64), inc, w)
            } else {
                (None, inc, w)
            }
        })
        .collect();

    let mut mass = vec![0.0; width];
    let origin = (-k_lo) as usize;
    mass[origin] = 1.0;
    let mut one = 0.0;
    let mut zero = 0.0;
    for _ in 0..spec.max_samples {
        let mut next = vec![0.0; width];
        let mut alive = 0.0;
        for (idx, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let k = idx as i64 + k_lo;
            for &(step, inc, w) in &steps {
                let moved = m * w;
                match step {
                    None if inc > 0.0 => one += moved,
                    None => zero += moved,
                    Some(s) => {
                        let target = k + s;
                        if target > k_hi {
                            one += moved;
                        } else if target < k_lo {
                            zero += moved;
                        } else {
                            next[(target - k_lo) as usize] += moved;
                            alive += moved;
                        }
                    }
                }
            }
        }
        mass = next;
        if alive < 1e-12 {
            break;
        }
    }
    // decisions at the cap follow the sign of the statistic
    let mut truncated = 0.0;
    for (idx, &m) in mass.iter().enumerate() {
        truncated += m;
        if idx as i64 + k_lo > 0 {
            one += m;
        }
    }
    let _ = zero;
    SprtOracle {
        p_decide_one: one,
        truncated,
    }
}

/// Minimum error over all `2^N` deterministic decision rules.
pub fn brute_force_min_error(prob: &DetectionProblem) -> f64 {
    let n = prob.p0.len();
    let [z0, z1] = prob.priors;
    (0u32..1 << n)
        .map(|mask| {
            (0..n)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        z0 * prob.p0[i]
                    } else {
                        z1 * prob.p1[i]
                    }
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// `Tr[W1 Pi1] + Tr[W0 (I - Pi1)]` with `Pi1 = sum_i beta_i M(i)`, evaluated
/// on full matrices.
pub fn matrix_cost(risks: &RiskPair, povm: &Povm, beta: &[f64]) -> f64 {
    let dim = povm.dim();
    let mut pi1 = ComplexMatrix::zeros(dim);
    for (m, &b) in povm.elements().iter().zip(beta) {
        pi1 = &pi1 + &m.matrix().scale(b);
    }
    let pi0 = &ComplexMatrix::identity(dim) - &pi1;
    let trace = |w: &HermitianMatrix, p: &ComplexMatrix| (w.matrix() * p).trace().re;
    trace(&risks.w1, &pi1) + trace(&risks.w0, &pi0)
}

/// Minimum of [`matrix_cost`] over `beta` on a grid of the given step.
/// Small problems are searched exhaustively; larger ones by coordinate
/// sweeps over the grid until no coordinate improves.
pub fn beta_grid_min(risks: &RiskPair, povm: &Povm, step: f64) -> f64 {
    let levels = (1.0 / step).round() as usize;
    let grid: Vec<f64> = (0..=levels).map(|j| j as f64 / levels as f64).collect();
    let n = povm.len();
    if (grid.len() as f64).powi(n as i32) <= 2e5 {
        let mut beta = vec![0.0; n];
        let mut best = f64::INFINITY;
        let mut idx = vec![0usize; n];
        loop {
            for (b, &i) in beta.iter_mut().zip(&idx) {
                *b = grid[i];
            }
            best = best.min(matrix_cost(risks, povm, &beta));
            let mut pos = 0;
            loop {
                if pos == n {
                    return best;
                }
                idx[pos] += 1;
                if idx[pos] < grid.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }
    let mut beta = vec![0.5; n];
    let mut best = matrix_cost(risks, povm, &beta);
    loop {
        let before = best;
        for i in 0..n {
            for &g in &grid {
                let old = beta[i];
                beta[i] = g;
                let c = matrix_cost(risks, povm, &beta);
                if c < best {
                    best = c;
                } else {
                    beta[i] = old;
                }
            }
        }
        if best >= before - 1e-15 {
            return best;
        }
    }
}
