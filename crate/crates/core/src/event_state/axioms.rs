use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Deviation above which an axiom instance is reported as failing.
pub const AXIOM_TOL: f64 = 1e-8;
const DOMAIN_TOL: f64 = super::operation::DOMAIN_TOL;
const MIXTURE_WEIGHT: f64 = 0.3;

/// Events, states, a probability function and the conditioning operations
/// on one concrete model.
pub trait EventStateModel {
    type Event: Clone;
    type State: Clone;

    fn probability(&self, event: &Self::Event, state: &Self::State) -> f64;
    /// The state conditioned on `event`; `OutOfDomain` when the event has zero probability.
    fn condition(&self, event: &Self::Event, state: &Self::State) -> Result<Self::State>;
    /// `e <= f`
    fn implies(&self, e: &Self::Event, f: &Self::Event) -> bool;
    fn compatible(&self, e: &Self::Event, f: &Self::Event) -> bool;
    fn meet(&self, e: &Self::Event, f: &Self::Event) -> Self::Event;
    fn complement(&self, e: &Self::Event) -> Self::Event;
    /// `weight * a + (1 - weight) * b`
    fn mixture(&self, weight: f64, a: &Self::State, b: &Self::State) -> Self::State;
    fn state_distance(&self, a: &Self::State, b: &Self::State) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub instance: String,
    pub max_deviation: f64,
    pub states_checked: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub model: String,
    pub tolerance: f64,
    pub checks: Vec<AxiomCheck>,
    pub all_passed: bool,
}

impl AxiomReport {
    pub fn new(model: impl Into<String>, checks: Vec<AxiomCheck>) -> Self {
        let all_passed = checks.iter().all(|c| c.passed);
        Self {
            model: model.into(),
            tolerance: AXIOM_TOL,
            checks,
            all_passed,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Largest deviation recorded for the named axiom.
    pub fn max_deviation(&self, axiom: &str) -> Option<f64> {
        self.checks
            .iter()
            .filter(|c| c.axiom == axiom)
            .map(|c| c.max_deviation)
            .reduce(f64::max)
    }

    pub fn count(&self, axiom: &str) -> usize {
        self.checks.iter().filter(|c| c.axiom == axiom).count()
    }
}

/// Axiom names used in reports.
pub mod names {
    pub const DOMAIN: &str = "domain";
    pub const CERTAIN_STATE_FIXED: &str = "certain_state_fixed";
    pub const CONDITIONING_CERTAINTY: &str = "conditioning_certainty";
    pub const IDEMPOTENCE: &str = "idempotence";
    pub const NESTED_RATIO: &str = "nested_ratio";
    pub const COMPATIBLE_MEET: &str = "compatible_meet";
    pub const COMPATIBILITY_IFF_COMMUTING: &str = "compatibility_iff_commuting";
    pub const COMPLEMENT_PROBABILITY: &str = "complement_probability";
    pub const CONVEXITY: &str = "convexity";
}

#[derive(Default)]
struct Tally {
    worst: f64,
    states: usize,
}

impl Tally {
    fn record(&mut self, deviation: f64) {
        self.states += 1;
        if deviation.is_nan() {
            self.worst = f64::INFINITY;
        } else {
            self.worst = self.worst.max(deviation);
        }
    }

    fn into_check(self, axiom: &str, instance: String) -> AxiomCheck {
        AxiomCheck {
            axiom: axiom.to_string(),
            instance,
            max_deviation: self.worst,
            states_checked: self.states,
            passed: self.worst <= AXIOM_TOL,
        }
    }
}

/// Runs every testable axiom instance over the labelled events and the
/// given states. Pairwise checks cover all ordered pairs of events.
pub fn axiom_suite<M: EventStateModel>(
    model: &M,
    model_name: &str,
    events: &[(String, M::Event)],
    states: &[M::State],
) -> AxiomReport {
    let mut checks = Vec::new();

    for (label, e) in events {
        let mut domain = Tally::default();
        let mut certainty = Tally::default();
        let mut fixed = Tally::default();
        let mut idempotent = Tally::default();
        let mut complement = Tally::default();
        let e_c = model.complement(e);

        for state in states {
            let p = model.probability(e, state);
            complement.record((p + model.probability(&e_c, state) - 1.0).abs());
            let conditioned = model.condition(e, state);
            let in_domain = p > DOMAIN_TOL;
            domain.record(if conditioned.is_ok() == in_domain { 0.0 } else { 1.0 });
            let Ok(conditioned) = conditioned else {
                continue;
            };
            certainty.record((model.probability(e, &conditioned) - 1.0).abs());
            if (p - 1.0).abs() <= 1e-12 {
                fixed.record(model.state_distance(&conditioned, state));
            }
            // conditioned state is certain for e, so conditioning again must not move it
            match model.condition(e, &conditioned) {
                Ok(again) => {
                    let d = model.state_distance(&again, &conditioned);
                    fixed.record(d);
                    idempotent.record(d);
                }
                Err(_) => {
                    fixed.record(f64::INFINITY);
                    idempotent.record(f64::INFINITY);
                }
            }
        }
        checks.push(domain.into_check(names::DOMAIN, label.clone()));
        checks.push(certainty.into_check(names::CONDITIONING_CERTAINTY, label.clone()));
        checks.push(fixed.into_check(names::CERTAIN_STATE_FIXED, label.clone()));
        checks.push(idempotent.into_check(names::IDEMPOTENCE, label.clone()));
        checks.push(complement.into_check(names::COMPLEMENT_PROBABILITY, label.clone()));

        let mut convex = Tally::default();
        for pair in states.windows(2) {
            let mixed = model.mixture(MIXTURE_WEIGHT, &pair[0], &pair[1]);
            let expected = MIXTURE_WEIGHT * model.probability(e, &pair[0])
                + (1.0 - MIXTURE_WEIGHT) * model.probability(e, &pair[1]);
            convex.record((model.probability(e, &mixed) - expected).abs());
        }
        checks.push(convex.into_check(names::CONVEXITY, label.clone()));
    }

    for (i, (l1, e1)) in events.iter().enumerate() {
        for (j, (l2, e2)) in events.iter().enumerate() {
            if i == j {
                continue;
            }
            if model.implies(e2, e1) {
                let mut ratio = Tally::default();
                for state in states {
                    let p1 = model.probability(e1, state);
                    if p1 <= DOMAIN_TOL {
                        continue;
                    }
                    let Ok(conditioned) = model.condition(e1, state) else {
                        ratio.record(f64::INFINITY);
                        continue;
                    };
                    let expected = model.probability(e2, state) / p1;
                    ratio.record((model.probability(e2, &conditioned) - expected).abs());
                }
                checks.push(ratio.into_check(names::NESTED_RATIO, format!("{l2} <= {l1}")));
            }
            let compatible = model.compatible(e1, e2);
            if compatible {
                let meet = model.meet(e1, e2);
                let mut tally = Tally::default();
                for state in states {
                    if let Ok(conditioned) = model.condition(e1, state) {
                        let lhs = model.probability(e2, &conditioned);
                        let rhs = model.probability(&meet, &conditioned);
                        tally.record((lhs - rhs).abs());
                    }
                }
                checks.push(tally.into_check(names::COMPATIBLE_MEET, format!("{l1}, {l2}")));
            }
            if i < j {
                let (deviation, n) = commutation_deviation(model, e1, e2, states);
                let commute = deviation <= AXIOM_TOL;
                checks.push(AxiomCheck {
                    axiom: names::COMPATIBILITY_IFF_COMMUTING.to_string(),
                    instance: format!(
                        "{l1}, {l2} ({})",
                        if compatible { "compatible" } else { "incompatible" }
                    ),
                    max_deviation: deviation,
                    states_checked: n,
                    passed: commute == compatible,
                });
            }
        }
    }

    AxiomReport::new(model_name, checks)
}

/// Largest distance between `T_e(T_f(rho))` and `T_f(T_e(rho))` over the
/// states; infinite when exactly one side is defined.
pub fn commutation_deviation<M: EventStateModel>(
    model: &M,
    e: &M::Event,
    f: &M::Event,
    states: &[M::State],
) -> (f64, usize) {
    let mut worst = 0.0_f64;
    let mut n = 0;
    for state in states {
        let ef = model.condition(f, state).and_then(|s| model.condition(e, &s));
        let fe = model.condition(e, state).and_then(|s| model.condition(f, &s));
        match (ef, fe) {
            (Ok(a), Ok(b)) => {
                n += 1;
                worst = worst.max(model.state_distance(&a, &b));
            }
            (Err(_), Err(_)) => {}
            _ => {
                n += 1;
                worst = f64::INFINITY;
            }
        }
    }
    (worst, n)
}
