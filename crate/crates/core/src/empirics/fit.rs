use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_state::Operation;
use crate::linalg::{DensityState, HermitianMatrix, Projection};

pub const Q_GRID_STEP: f64 = 0.01;
const TIE_TOL: f64 = 1e-15;
const REFINE_ITERS: usize = 200;

/// `rho = diag(q, 1 - q)` on the real plane with one rank-one event per
/// target, `E_i` projecting onto `(cos t_i, sin t_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub q: f64,
    /// Angles in radians, each in `[0, pi/2]`.
    pub angles: Vec<f64>,
    pub rho: DensityState,
    pub projections: Vec<Projection>,
    /// `max_i |Tr[rho E_i] - target_i|`
    pub residual: f64,
}

impl FittedModel {
    fn build(q: f64, angles: Vec<f64>, targets: &[f64]) -> Self {
        let rho = DensityState::new(HermitianMatrix::from_diagonal(&[q, 1.0 - q]))
            .expect("diagonal of a probability pair");
        let projections: Vec<Projection> = angles.iter().map(|&t| Projection::at_angle(t)).collect();
        let residual = projections
            .iter()
            .zip(targets)
            .map(|(p, &t)| (rho.probability(p) - t).abs())
            .fold(0.0, f64::max);
        Self {
            q,
            angles,
            rho,
            projections,
            residual,
        }
    }

    /// `Tr[rho E_i]` for each fitted event.
    pub fn probabilities(&self) -> Vec<f64> {
        self.projections.iter().map(|p| self.rho.probability(p)).collect()
    }

    /// Model prediction of `P[target | first, then second]`; events are
    /// `(1-based index, value)` with value 0 meaning the complement.
    pub fn predicted_conditional(&self, first: (usize, u8), second: (usize, u8), target: (usize, u8)) -> Result<f64> {
        let event = |(i, v): (usize, u8)| -> Result<Projection> {
            let p = self
                .projections
                .get(i.wrapping_sub(1))
                .ok_or_else(|| Error::invalid("event index", format!("{i} outside 1..={}", self.projections.len())))?;
            Ok(if v == 1 { p.clone() } else { p.complement() })
        };
        let op = Operation::new(vec![event(first)?, event(second)?])?;
        let target = event(target)?;
        Ok(op.apply(&self.rho)?.probability(&target))
    }
}

fn angle_for(q: f64, target: f64) -> f64 {
    let slope = 2.0 * q - 1.0;
    if slope.abs() < TIE_TOL {
        return 0.0;
    }
    let c2 = ((target - (1.0 - q)) / slope).clamp(0.0, 1.0);
    c2.sqrt().acos()
}

/// Best angles for the fixed state `diag(q, 1 - q)`, each chosen on its own
/// (the smallest angle attaining the minimum), with the resulting residual.
pub fn fit_angles_for_state(q: f64, targets: &[f64]) -> (Vec<f64>, f64) {
    let angles: Vec<f64> = targets.iter().map(|&t| angle_for(q, t)).collect();
    let residual = angles
        .iter()
        .zip(targets)
        .map(|(&a, &t)| {
            let c2 = a.cos().powi(2);
            (q * c2 + (1.0 - q) * (1.0 - c2) - t).abs()
        })
        .fold(0.0, f64::max);
    (angles, residual)
}

/// Fits `rho` and rank-one events to the target probabilities: a grid over
/// `q` with the per-angle optimum at each grid point, then a golden-section
/// refinement of `q` around the best grid point. Among equally good fits the
/// smallest `q` wins.
pub fn fit_von_neumann_model(targets: &[f64]) -> Result<FittedModel> {
    if targets.is_empty() || targets.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::invalid("fit targets", format!("{targets:?} not in [0, 1]")));
    }
    let steps = (1.0 / Q_GRID_STEP).round() as usize;
    let mut best_q = 0.0;
    let mut best_r = f64::INFINITY;
    for k in 0..=steps {
        let q = k as f64 * Q_GRID_STEP;
        let (_, r) = fit_angles_for_state(q, targets);
        if r < best_r - TIE_TOL {
            best_q = q;
            best_r = r;
        }
    }
    if best_r > 1e-12 {
        let residual = |q: f64| fit_angles_for_state(q, targets).1;
        let (mut lo, mut hi) = ((best_q - Q_GRID_STEP).max(0.0), (best_q + Q_GRID_STEP).min(1.0));
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..REFINE_ITERS {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if residual(a) <= residual(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let q = 0.5 * (lo + hi);
        let r = residual(q);
        if r < best_r {
            best_q = q;
        }
    }
    let (angles, _) = fit_angles_for_state(best_q, targets);
    Ok(FittedModel::build(best_q, angles, targets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn forward_generated_targets_are_reproduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let q: f64 = rng.gen();
            let thetas: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect();
            let targets: Vec<f64> = thetas
                .iter()
                .map(|t| q * t.cos().powi(2) + (1.0 - q) * t.sin().powi(2))
                .collect();
            let fit = fit_von_neumann_model(&targets).unwrap();
            assert!(fit.residual < 1e-6);
            for (p, t) in fit.probabilities().iter().zip(&targets) {
                assert!((p - t).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn maximally_mixed_state_fits_half_targets_with_any_angle() {
        let (angles, r) = fit_angles_for_state(0.5, &[0.5, 0.5, 0.5]);
        assert_eq!(r, 0.0);
        assert_eq!(angles, vec![0.0; 3]);
        let fit = fit_von_neumann_model(&[0.5, 0.5, 0.5]).unwrap();
        assert!(fit.residual < 1e-15);
    }

    #[test]
    fn extreme_targets_fit() {
        let fit = fit_von_neumann_model(&[0.9, 0.1, 0.5]).unwrap();
        assert!(fit.residual < 1e-6);
        // distinct targets give pairwise non-commuting events
        let p = &fit.projections;
        assert!((&*p[0] * &*p[1]).max_abs_diff(&(&*p[1] * &*p[0])) > 1e-3);
    }

    #[test]
    fn refit_is_scale_consistent() {
        let fit = fit_von_neumann_model(&[0.3, 0.72, 0.55]).unwrap();
        let again = fit_von_neumann_model(&fit.probabilities()).unwrap();
        assert!(again.residual <= fit.residual + 1e-9);
    }

    #[test]
    fn out_of_range_targets_are_rejected() {
        assert!(fit_von_neumann_model(&[1.2]).is_err());
        assert!(fit_von_neumann_model(&[]).is_err());
    }

    #[test]
    fn predicted_conditionals_depend_on_order() {
        let fit = fit_von_neumann_model(&[0.45, 0.55, 0.6]).unwrap();
        let a = fit.predicted_conditional((1, 1), (2, 1), (3, 1)).unwrap();
        let b = fit.predicted_conditional((2, 1), (1, 1), (3, 1)).unwrap();
        assert!((a - b).abs() > 1e-6);
        // rank-one collapse: the last event fixes the state
        let e2 = &fit.projections[1];
        let e3 = &fit.projections[2];
        let expected = (&**e2 * &**e3).trace().re;
        assert!((a - expected).abs() < 1e-12);
    }
}
