use serde::{Deserialize, Serialize};

use super::axioms::{axiom_suite, AxiomReport, EventStateModel};
use crate::error::{Error, Result};

/// A finite sample space (at most 64 points) with events as bitmasks and
/// states as probability vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalModel {
    pub sample_space_size: usize,
    pub events: Vec<u64>,
    pub measures: Vec<Vec<f64>>,
}

pub const MEASURE_SUM_TOL: f64 = 1e-12;

impl ClassicalModel {
    pub fn new(sample_space_size: usize, events: Vec<u64>, measures: Vec<Vec<f64>>) -> Result<Self> {
        if sample_space_size == 0 || sample_space_size > 64 {
            return Err(Error::invalid(
                "classical model",
                format!("sample space size {sample_space_size} outside 1..=64"),
            ));
        }
        let model = Self {
            sample_space_size,
            events,
            measures,
        };
        for &e in &model.events {
            if e & !model.full() != 0 {
                return Err(Error::invalid(
                    "classical model",
                    format!("event {e:#x} has points outside the sample space"),
                ));
            }
        }
        for mu in &model.measures {
            validate_measure(mu, sample_space_size)?;
        }
        Ok(model)
    }

    /// Event containing every sample point.
    pub fn full(&self) -> u64 {
        if self.sample_space_size == 64 {
            u64::MAX
        } else {
            (1u64 << self.sample_space_size) - 1
        }
    }

    /// Listed events together with their complements, the empty event and the full event.
    pub fn closed_events(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for &e in &self.events {
            for x in [e, self.full() & !e] {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        for x in [0, self.full()] {
            if !out.contains(&x) {
                out.push(x);
            }
        }
        out
    }

    pub fn axiom_suite(&self) -> AxiomReport {
        let labelled: Vec<(String, u64)> = self
            .closed_events()
            .into_iter()
            .map(|e| (format!("{{{}}}", members(e).map(|i| i.to_string()).collect::<Vec<_>>().join(",")), e))
            .collect();
        axiom_suite(self, "classical", &labelled, &self.measures)
    }
}

fn validate_measure(mu: &[f64], n: usize) -> Result<()> {
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: mu.len(),
        });
    }
    if mu.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::invalid("probability measure", "negative or non-finite mass"));
    }
    let total: f64 = mu.iter().sum();
    if (total - 1.0).abs() > MEASURE_SUM_TOL {
        return Err(Error::invalid(
            "probability measure",
            format!("total mass {total} differs from 1"),
        ));
    }
    Ok(())
}

fn members(event: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| event >> i & 1 == 1)
}

/// `mu(event)`
pub fn measure_of(event: u64, mu: &[f64]) -> f64 {
    members(event).filter(|&i| i < mu.len()).map(|i| mu[i]).sum()
}

/// `F -> mu(E ∩ F) / mu(E)`, as a probability vector supported inside `E`.
pub fn classical_operation(model: &ClassicalModel, event: u64, mu: &[f64]) -> Result<Vec<f64>> {
    if mu.len() != model.sample_space_size {
        return Err(Error::DimensionMismatch {
            expected: model.sample_space_size,
            found: mu.len(),
        });
    }
    let mass = measure_of(event, mu);
    if mass <= 0.0 {
        return Err(Error::OutOfDomain { probability: mass });
    }
    Ok(mu
        .iter()
        .enumerate()
        .map(|(i, &x)| if event >> i & 1 == 1 { x / mass } else { 0.0 })
        .collect())
}

impl EventStateModel for ClassicalModel {
    type Event = u64;
    type State = Vec<f64>;

    fn probability(&self, event: &u64, state: &Vec<f64>) -> f64 {
        measure_of(*event, state)
    }

    fn condition(&self, event: &u64, state: &Vec<f64>) -> Result<Vec<f64>> {
        classical_operation(self, *event, state)
    }

    fn implies(&self, e: &u64, f: &u64) -> bool {
        e & !f == 0
    }

    fn compatible(&self, _e: &u64, _f: &u64) -> bool {
        true
    }

    fn meet(&self, e: &u64, f: &u64) -> u64 {
        e & f
    }

    fn complement(&self, e: &u64) -> u64 {
        self.full() & !e
    }

    fn mixture(&self, weight: f64, a: &Vec<f64>, b: &Vec<f64>) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| weight * x + (1.0 - weight) * y).collect()
    }

    fn state_distance(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}
