//! JSON description of a model for the axiom checker.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::axioms::{AxiomCheck, AxiomReport};
use super::classical::ClassicalModel;
use super::von_neumann::{validate_projection, EventSet};
use crate::error::Result;
use crate::linalg::{ComplexMatrix, DensityState, Projection};
use crate::sampling::random_density_state;

fn default_random_states() -> usize {
    50
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    VonNeumann {
        events: Vec<EventSpec>,
        /// Number of seeded random states added to `states`.
        #[serde(default = "default_random_states")]
        random_states: usize,
        #[serde(default)]
        states: Vec<ComplexMatrix>,
    },
    Classical {
        sample_space_size: usize,
        /// Each event as a list of sample point indices.
        events: Vec<Vec<usize>>,
        measures: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventSpec {
    pub label: String,
    /// Rank-one projection on the real plane at this angle in degrees.
    #[serde(default)]
    pub angle_deg: Option<f64>,
    #[serde(default)]
    pub matrix: Option<ComplexMatrix>,
}

fn invariant_failure(label: &str, reason: String) -> AxiomCheck {
    AxiomCheck {
        axiom: "projection_invariant".into(),
        instance: format!("{label}: {reason}"),
        max_deviation: f64::INFINITY,
        states_checked: 0,
        passed: false,
    }
}

impl ModelSpec {
    /// Runs the axiom checks. Events that are not projections show up as
    /// failing `projection_invariant` entries instead of errors.
    pub fn run(&self, seed: u64) -> Result<AxiomReport> {
        match self {
            ModelSpec::Classical {
                sample_space_size,
                events,
                measures,
            } => {
                let masks = events
                    .iter()
                    .map(|points| points.iter().fold(0u64, |m, &i| m | 1u64.checked_shl(i as u32).unwrap_or(0)))
                    .collect();
                let model = ClassicalModel::new(*sample_space_size, masks, measures.clone())?;
                Ok(model.axiom_suite())
            }
            ModelSpec::VonNeumann {
                events,
                random_states,
                states,
            } => {
                let mut failures = Vec::new();
                let mut generators = Vec::new();
                for ev in events {
                    let projection = match (&ev.angle_deg, &ev.matrix) {
                        (Some(deg), None) => Ok(Projection::at_angle(deg.to_radians())),
                        (None, Some(m)) => validate_projection(m.clone()),
                        _ => Err("exactly one of angle_deg and matrix is required".to_string()),
                    };
                    match projection {
                        Ok(p) => generators.push((ev.label.clone(), p)),
                        Err(reason) => failures.push(invariant_failure(&ev.label, reason)),
                    }
                }
                if !failures.is_empty() {
                    return Ok(AxiomReport::new("von_neumann", failures));
                }
                let set = EventSet::new(generators)?;
                let mut all_states = states
                    .iter()
                    .map(|m| DensityState::try_from(m.clone()))
                    .collect::<Result<Vec<_>>>()?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                all_states.extend((0..*random_states).map(|_| random_density_state(&mut rng, set.dim())));
                let mut report = set.axiom_suite(&all_states);
                let lattice = set.lattice_report();
                report.checks.push(AxiomCheck {
                    axiom: "orthocomplement_identities".into(),
                    instance: if lattice.failures.is_empty() {
                        "all events".into()
                    } else {
                        lattice.failures.join("; ")
                    },
                    max_deviation: 0.0,
                    states_checked: 0,
                    passed: lattice.orthocomplement_identities_hold,
                });
                Ok(AxiomReport::new(report.model, report.checks))
            }
        }
    }
}
