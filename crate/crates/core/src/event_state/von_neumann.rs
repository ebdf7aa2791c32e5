use serde::{Deserialize, Serialize};

use super::axioms::{axiom_suite, AxiomReport, EventStateModel};
use super::operation::{apply_operation, are_compatible, implies, join, meet};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityState, HermitianMatrix, Projection};

const SAME_EVENT_TOL: f64 = 1e-10;

/// Projections on `C^dim` with states given by density operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VonNeumannModel {
    pub dim: usize,
}

impl EventStateModel for VonNeumannModel {
    type Event = Projection;
    type State = DensityState;

    fn probability(&self, event: &Projection, state: &DensityState) -> f64 {
        state.probability(event)
    }

    fn condition(&self, event: &Projection, state: &DensityState) -> Result<DensityState> {
        apply_operation(event, state)
    }

    fn implies(&self, e: &Projection, f: &Projection) -> bool {
        implies(e, f)
    }

    fn compatible(&self, e: &Projection, f: &Projection) -> bool {
        are_compatible(e, f)
    }

    fn meet(&self, e: &Projection, f: &Projection) -> Projection {
        meet(e, f)
    }

    fn complement(&self, e: &Projection) -> Projection {
        e.complement()
    }

    fn mixture(&self, weight: f64, a: &DensityState, b: &DensityState) -> DensityState {
        let mixed = a.hermitian().scale(weight).add(&b.hermitian().scale(1.0 - weight));
        DensityState::normalized_unchecked(mixed)
    }

    fn state_distance(&self, a: &DensityState, b: &DensityState) -> f64 {
        a.max_abs_diff(b)
    }
}

/// A finite set of projections closed under complementation and containing
/// the zero and identity projections.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSet {
    dim: usize,
    labels: Vec<String>,
    events: Vec<Projection>,
}

impl EventSet {
    /// Closure of the named generators: adds each complement, `0` and `I`,
    /// dropping duplicates.
    pub fn new(generators: Vec<(String, Projection)>) -> Result<Self> {
        let dim = generators
            .first()
            .map(|(_, p)| p.dim())
            .ok_or_else(|| Error::invalid("event set", "no generating events"))?;
        let mut set = Self {
            dim,
            labels: Vec::new(),
            events: Vec::new(),
        };
        for (_, p) in &generators {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
        }
        for (label, p) in &generators {
            set.insert(label.clone(), p.clone());
        }
        for (label, p) in &generators {
            set.insert(format!("I-{label}"), p.complement());
        }
        set.insert("0".into(), Projection::zero(dim));
        set.insert("I".into(), Projection::identity(dim));
        Ok(set)
    }

    /// Rank-one events on the real plane at the given angles (radians),
    /// labelled `E1, E2, ...`.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        Self::new(
            angles
                .iter()
                .enumerate()
                .map(|(i, &t)| (format!("E{}", i + 1), Projection::at_angle(t)))
                .collect(),
        )
    }

    fn insert(&mut self, label: String, p: Projection) {
        if self.events.iter().any(|q| q.max_abs_diff(&p) <= SAME_EVENT_TOL) {
            return;
        }
        self.labels.push(label);
        self.events.push(p);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn events(&self) -> &[Projection] {
        &self.events
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, label: &str) -> Option<&Projection> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| &self.events[i])
    }

    pub fn labelled(&self) -> Vec<(String, Projection)> {
        self.labels.iter().cloned().zip(self.events.iter().cloned()).collect()
    }

    pub fn axiom_suite(&self, states: &[DensityState]) -> AxiomReport {
        axiom_suite(
            &VonNeumannModel { dim: self.dim },
            "von_neumann",
            &self.labelled(),
            states,
        )
    }

    /// Checks the orthocomplement identities over all elements and pairs,
    /// and searches for a triple violating distributivity.
    pub fn lattice_report(&self) -> LatticeReport {
        let mut failures = Vec::new();
        let id = ComplexMatrix::identity(self.dim);
        let eq = |a: &ComplexMatrix, b: &ComplexMatrix| a.max_abs_diff(b) <= 1e-8;
        for (l, p) in self.labels.iter().zip(&self.events) {
            let pc = p.complement();
            if !eq(&pc.complement(), p) {
                failures.push(format!("double complement of {l}"));
            }
            if !meet(p, &pc).is_zero(1e-8) || !eq(&join(p, &pc), &id) {
                failures.push(format!("complement bounds of {l}"));
            }
        }
        for (l1, p1) in self.labels.iter().zip(&self.events) {
            for (l2, p2) in self.labels.iter().zip(&self.events) {
                if implies(p1, p2) && !implies(&p2.complement(), &p1.complement()) {
                    failures.push(format!("order reversal for {l1} <= {l2}"));
                }
                let lhs = meet(p1, p2).complement();
                let rhs = join(&p1.complement(), &p2.complement());
                if !eq(&lhs, &rhs) {
                    failures.push(format!("de Morgan for {l1}, {l2}"));
                }
            }
        }

        let mut distributive_violation = None;
        'search: for (i, p1) in self.events.iter().enumerate() {
            for (j, p2) in self.events.iter().enumerate() {
                for (k, p3) in self.events.iter().enumerate() {
                    let lhs = join(p1, &meet(p2, p3));
                    let rhs = meet(&join(p1, p2), &join(p1, p3));
                    if !eq(&lhs, &rhs) {
                        distributive_violation = Some([
                            self.labels[i].clone(),
                            self.labels[j].clone(),
                            self.labels[k].clone(),
                        ]);
                        break 'search;
                    }
                }
            }
        }
        LatticeReport {
            orthocomplement_identities_hold: failures.is_empty(),
            failures,
            distributive_violation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub orthocomplement_identities_hold: bool,
    pub failures: Vec<String>,
    /// `(p1, p2, p3)` with `p1 v (p2 ^ p3) != (p1 v p2) ^ (p1 v p3)`.
    pub distributive_violation: Option<[String; 3]>,
}

/// Checks that a raw matrix is a projection, naming the violated invariant.
pub fn validate_projection(m: ComplexMatrix) -> std::result::Result<Projection, String> {
    let h = HermitianMatrix::new(m).map_err(|e| format!("hermitian: {e}"))?;
    Projection::new(h).map_err(|e| format!("idempotent: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_state::axioms::names;
    use crate::sampling::{random_density_state, random_projection};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn states(dim: usize, n: usize, seed: u64) -> Vec<DensityState> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| random_density_state(&mut rng, dim)).collect()
    }

    #[test]
    fn closure_contains_bounds_and_complements() {
        let set = EventSet::from_angles(&[0.2, 0.9, 2.0]).unwrap();
        assert_eq!(set.events().len(), 8);
        for p in set.events() {
            let c = p.complement();
            assert!(set.events().iter().any(|q| q.max_abs_diff(&c) < 1e-12));
        }
        assert!(set.get("0").is_some() && set.get("I").is_some());
        assert_eq!(&set.labels()[..3], &["E1", "E2", "E3"]);
    }

    #[test]
    fn plane_model_passes_axiom_suite() {
        let set = EventSet::from_angles(&[0.3, 1.1, 2.4]).unwrap();
        let report = set.axiom_suite(&states(2, 50, 1));
        let failed: Vec<_> = report.failures().collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert!(report.count(names::NESTED_RATIO) > 0);
        assert!(report.count(names::COMPATIBLE_MEET) > 0);
    }

    #[test]
    fn higher_dimensional_model_passes_axiom_suite() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e = random_projection(&mut rng, 4, 2);
        let f = random_projection(&mut rng, 4, 1);
        let set = EventSet::new(vec![("E".into(), e), ("F".into(), f)]).unwrap();
        let report = set.axiom_suite(&states(4, 30, 3));
        assert!(report.all_passed, "{:?}", report.failures().collect::<Vec<_>>());
    }

    struct Unnormalized;

    impl EventStateModel for Unnormalized {
        type Event = Projection;
        type State = DensityState;
        fn probability(&self, e: &Projection, s: &DensityState) -> f64 {
            s.probability(e)
        }
        fn condition(&self, e: &Projection, s: &DensityState) -> Result<DensityState> {
            let p = s.probability(e);
            if p <= 1e-12 {
                return Err(Error::OutOfDomain { probability: p });
            }
            Ok(DensityState::new_unchecked(s.hermitian().congruence(e)))
        }
        fn implies(&self, e: &Projection, f: &Projection) -> bool {
            implies(e, f)
        }
        fn compatible(&self, e: &Projection, f: &Projection) -> bool {
            are_compatible(e, f)
        }
        fn meet(&self, e: &Projection, f: &Projection) -> Projection {
            meet(e, f)
        }
        fn complement(&self, e: &Projection) -> Projection {
            e.complement()
        }
        fn mixture(&self, w: f64, a: &DensityState, b: &DensityState) -> DensityState {
            VonNeumannModel { dim: 2 }.mixture(w, a, b)
        }
        fn state_distance(&self, a: &DensityState, b: &DensityState) -> f64 {
            a.max_abs_diff(b)
        }
    }

    #[test]
    fn unnormalized_update_fails_certainty() {
        let set = EventSet::from_angles(&[0.3, 1.1]).unwrap();
        let report = axiom_suite(&Unnormalized, "corrupted", &set.labelled(), &states(2, 20, 4));
        assert!(!report.all_passed);
        let bad = report
            .failures()
            .find(|c| c.axiom == names::CONDITIONING_CERTAINTY && c.instance == "E1");
        assert!(bad.is_some());
    }

    #[test]
    fn plane_lattice_is_orthocomplemented_but_not_distributive() {
        let set = EventSet::from_angles(&[0.3, 1.1, 2.4]).unwrap();
        let report = set.lattice_report();
        assert!(report.orthocomplement_identities_hold, "{:?}", report.failures);
        assert!(report.distributive_violation.is_some());
    }

    #[test]
    fn commuting_generators_give_distributive_lattice() {
        let set = EventSet::new(vec![
            ("A".into(), Projection::basis(3, 0)),
            ("B".into(), Projection::basis(3, 1)),
        ])
        .unwrap();
        let report = set.lattice_report();
        assert!(report.orthocomplement_identities_hold);
        assert!(report.distributive_violation.is_none());
    }

    #[test]
    fn validate_projection_names_the_invariant() {
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 0.5], vec![0.5, 0.0]]).unwrap();
        assert!(validate_projection(m).unwrap_err().starts_with("idempotent"));
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 0.5], vec![0.0, 0.0]]).unwrap();
        assert!(validate_projection(m).unwrap_err().starts_with("hermitian"));
    }
}
