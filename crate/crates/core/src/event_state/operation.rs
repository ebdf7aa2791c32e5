use std::sync::OnceLock;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    product_chain, projection_onto_nullspace_with_floor, ComplexMatrix, DensityState,
    HermitianMatrix, Projection,
};
use crate::sampling::random_density_state;

/// States with `Tr[rho E]` at or below this are outside the domain of `T_E`.
pub const DOMAIN_TOL: f64 = 1e-12;
/// Entrywise tolerance for deciding that two projections commute.
pub const COMMUTE_TOL: f64 = 1e-10;
/// Tolerance for comparing operation outputs on probe states.
pub const MAP_EQUALITY_TOL: f64 = 1e-8;
/// Number of pseudo-random probe states used to decide map equality.
pub const PROBE_STATES: usize = 200;
/// Singular values of projection products and sums at or below this are roundoff.
pub const PRODUCT_NULL_FLOOR: f64 = 1e-12;
const PROBE_SEED: u64 = 0x005e_ed0f_0b5e;

/// `T_E(rho) = E rho E / Tr[rho E]`.
pub fn apply_operation(event: &Projection, state: &DensityState) -> Result<DensityState> {
    state.checked_same_dim(event)?;
    let p = state.probability(event);
    if p <= DOMAIN_TOL {
        return Err(Error::OutOfDomain { probability: p });
    }
    let updated = state.hermitian().congruence(event);
    Ok(DensityState::normalized_unchecked(updated))
}

/// A composed operation: conditioning on `factors[0]`, then `factors[1]`,
/// and so on. The cached product is `U = F_n ... F_2 F_1`, so the operation
/// maps `rho` to `U rho U^H / Tr[U rho U^H]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operation {
    factors: Vec<Projection>,
    product: ComplexMatrix,
}

impl Operation {
    pub fn new(factors: Vec<Projection>) -> Result<Self> {
        let reversed: Vec<ComplexMatrix> =
            factors.iter().rev().map(|f| (**f).clone()).collect();
        let product = product_chain(&reversed)?;
        Ok(Self { factors, product })
    }

    pub fn single(event: Projection) -> Self {
        let product = (*event).clone();
        Self {
            factors: vec![event],
            product,
        }
    }

    pub fn factors(&self) -> &[Projection] {
        &self.factors
    }

    pub fn product(&self) -> &ComplexMatrix {
        &self.product
    }

    pub fn dim(&self) -> usize {
        self.product.dim()
    }

    /// `Tr[U rho U^H]`: the probability of observing every factor in order.
    pub fn sequence_probability(&self, state: &DensityState) -> f64 {
        state.hermitian().congruence(&self.product).trace_re()
    }

    pub fn apply(&self, state: &DensityState) -> Result<DensityState> {
        state.checked_same_dim(&self.product)?;
        let updated = state.hermitian().congruence(&self.product);
        let p = updated.trace_re();
        if p <= DOMAIN_TOL {
            return Err(Error::OutOfDomain { probability: p });
        }
        Ok(DensityState::normalized_unchecked(updated))
    }

    /// Reversed factor order.
    pub fn involution(&self) -> Operation {
        let factors: Vec<Projection> = self.factors.iter().rev().cloned().collect();
        Operation {
            product: self.product.adjoint(),
            factors,
        }
    }

    /// Event certain exactly on the states outside this operation's domain:
    /// the projection onto the null space of `U`.
    pub fn orthocomplement(&self) -> Projection {
        projection_onto_nullspace_with_floor(&self.product, PRODUCT_NULL_FLOOR)
    }

    /// Appends further conditioning steps after this operation.
    pub fn then(&self, next: &Operation) -> Operation {
        let factors = self.factors.iter().chain(&next.factors).cloned().collect();
        Operation {
            factors,
            product: &next.product * &self.product,
        }
    }

    /// Map equality decided on the shared probe set (see [`probe_states`]):
    /// identical domains and outputs within [`MAP_EQUALITY_TOL`].
    pub fn same_map_as(&self, other: &Operation) -> bool {
        self.max_map_deviation(other, probe_states(self.dim())) <= MAP_EQUALITY_TOL
    }

    /// Largest output deviation over `states`; infinite when the domains differ.
    pub fn max_map_deviation(&self, other: &Operation, states: &[DensityState]) -> f64 {
        let mut worst = 0.0_f64;
        for state in states {
            match (self.apply(state), other.apply(state)) {
                (Ok(a), Ok(b)) => worst = worst.max(a.max_abs_diff(&b)),
                (Err(_), Err(_)) => {}
                _ => return f64::INFINITY,
            }
        }
        worst
    }
}

pub fn compose_and_apply(op: &Operation, state: &DensityState) -> Result<DensityState> {
    op.apply(state)
}

pub fn involution(op: &Operation) -> Operation {
    op.involution()
}

pub fn operation_orthocomplement(op: &Operation) -> Projection {
    op.orthocomplement()
}

/// Compatibility of two events, which for projections is commutation.
pub fn are_compatible(e: &Projection, f: &Projection) -> bool {
    (&**e * &**f).max_abs_diff(&(&**f * &**e)) <= COMMUTE_TOL
}

/// `E <= F`, i.e. `E F = E`.
pub fn implies(e: &Projection, f: &Projection) -> bool {
    (&**e * &**f).max_abs_diff(e) <= COMMUTE_TOL
}

/// Projection onto `R(E) ∩ R(F)`, computed as the null space of `(I - E) + (I - F)`.
pub fn meet(e: &Projection, f: &Projection) -> Projection {
    let sum = &*e.complement() + &*f.complement();
    projection_onto_nullspace_with_floor(&sum, PRODUCT_NULL_FLOOR)
}

/// Projection onto the closed span of `R(E) ∪ R(F)`.
pub fn join(e: &Projection, f: &Projection) -> Projection {
    meet(&e.complement(), &f.complement()).complement()
}

/// Deterministic probe set for map comparisons in dimension `dim`: every
/// canonical basis state plus [`PROBE_STATES`] seeded random mixed states.
pub fn probe_states(dim: usize) -> &'static [DensityState] {
    static CACHE: OnceLock<Vec<Vec<DensityState>>> = OnceLock::new();
    const CACHED_DIMS: usize = 17;
    let cache = CACHE.get_or_init(|| (0..CACHED_DIMS).map(build_probes).collect());
    assert!(dim < CACHED_DIMS, "probe states cover dimensions up to 16");
    &cache[dim]
}

fn build_probes(dim: usize) -> Vec<DensityState> {
    if dim == 0 {
        return Vec::new();
    }
    let mut states: Vec<DensityState> = (0..dim)
        .map(|i| {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[i] = Complex64::new(1.0, 0.0);
            DensityState::pure(&v).expect("basis vector")
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED ^ dim as u64);
    states.extend((0..PROBE_STATES).map(|_| random_density_state(&mut rng, dim)));
    states
}

/// `EρE` without normalization, exposed for diagnostics.
pub fn unnormalized_update(event: &Projection, state: &DensityState) -> HermitianMatrix {
    state.hermitian().congruence(event)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{
        random_commuting_projections, random_density_state, random_projection,
    };
    use std::f64::consts::FRAC_PI_4;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    #[test]
    fn identity_event_leaves_state_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density_state(&mut rng, 3);
        let out = apply_operation(&Projection::identity(3), &rho).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-12);
    }

    #[test]
    fn rank_one_event_collapses_maximally_mixed_state() {
        let out = apply_operation(&Projection::basis(2, 0), &DensityState::maximally_mixed(2))
            .unwrap();
        assert!(out.max_abs_diff(&Projection::basis(2, 0)) < 1e-15);
    }

    #[test]
    fn rank_one_event_collapses_any_state_to_its_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for dim in 2..5 {
            let e = random_projection(&mut rng, dim, 1);
            let rho = random_density_state(&mut rng, dim);
            // E rho E = v (v^H rho v) v^H, so normalization leaves v v^H
            let out = apply_operation(&e, &rho).unwrap();
            assert!(out.max_abs_diff(&e) < 1e-12);
        }
    }

    #[test]
    fn out_of_domain_is_reported() {
        let rho = DensityState::pure(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
            .unwrap();
        let r = apply_operation(&Projection::basis(2, 0), &rho);
        assert!(matches!(r, Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn result_satisfies_certainty_of_conditioning_event() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let e = random_projection(&mut rng, 4, 2);
            let rho = random_density_state(&mut rng, 4);
            let out = apply_operation(&e, &rho).unwrap();
            assert!((out.probability(&e) - 1.0).abs() < 1e-9);
            assert!(out.hermitian().min_eigenvalue() > -1e-10);
            let again = apply_operation(&e, &out).unwrap();
            assert!(again.max_abs_diff(&out) < 1e-9);
        }
    }

    #[test]
    fn single_factor_operation_matches_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let e = random_projection(&mut rng, 3, 2);
        let rho = random_density_state(&mut rng, 3);
        let op = Operation::single(e.clone());
        let a = compose_and_apply(&op, &rho).unwrap();
        let b = apply_operation(&e, &rho).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn complementary_pair_has_empty_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = random_projection(&mut rng, 3, 1);
        let op = Operation::new(vec![e.clone(), e.complement()]).unwrap();
        for rho in probe_states(3) {
            assert!(matches!(op.apply(rho), Err(Error::OutOfDomain { .. })));
        }
    }

    #[test]
    fn two_step_real_plane_by_hand() {
        // condition I/2 on P(0deg): e1 e1^T; then on P(45deg): projector onto (1,1)/sqrt2
        let op = Operation::new(vec![Projection::at_angle(0.0), Projection::at_angle(FRAC_PI_4)])
            .unwrap();
        let out = op.apply(&DensityState::maximally_mixed(2)).unwrap();
        let expected =
            ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(out.max_abs_diff(&expected) < 1e-15);
        // sequence probability: Tr[rho E1] * Tr[T_E1(rho) E2] = 1/2 * 1/2
        let p = op.sequence_probability(&DensityState::maximally_mixed(2));
        assert!((p - 0.25).abs() < 1e-15);
    }

    #[test]
    fn composition_equals_sequential_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let dim = 3;
            let factors: Vec<Projection> =
                (0..3).map(|_| random_projection(&mut rng, dim, 2)).collect();
            let rho = random_density_state(&mut rng, dim);
            let op = Operation::new(factors.clone()).unwrap();
            let mut seq = rho.clone();
            for f in &factors {
                seq = apply_operation(f, &seq).unwrap();
            }
            assert!(op.apply(&rho).unwrap().max_abs_diff(&seq) < 1e-9);
        }
    }

    #[test]
    fn involution_reverses_and_is_an_involution() {
        let e = Projection::at_angle(deg(10.0));
        let f = Projection::at_angle(deg(70.0));
        let op = Operation::new(vec![e.clone(), f.clone()]).unwrap();
        let inv = involution(&op);
        assert_eq!(inv.factors(), &[f.clone(), e.clone()]);
        assert_eq!(involution(&inv), op);
        let single = Operation::single(e.clone());
        assert_eq!(involution(&single).factors(), single.factors());
    }

    #[test]
    fn equal_maps_have_equal_involutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (e, f) = random_commuting_projections(&mut rng, 3);
            let g = random_projection(&mut rng, 3, 2);
            let a = Operation::new(vec![e.clone(), f.clone(), g.clone()]).unwrap();
            let b = Operation::new(vec![f.clone(), e.clone(), g.clone()]).unwrap();
            assert!(a.same_map_as(&b));
            assert!(a.involution().same_map_as(&b.involution()));
        }
        // a non-commuting pair gives different maps
        let a = Operation::new(vec![Projection::at_angle(0.0), Projection::at_angle(0.5)]).unwrap();
        assert!(!a.same_map_as(&a.involution()));
    }

    #[test]
    fn orthocomplement_examples() {
        let e = Projection::at_angle(deg(30.0));
        let q = operation_orthocomplement(&Operation::single(e.clone()));
        assert!(q.max_abs_diff(&e.complement()) < 1e-12);

        let f = Projection::at_angle(deg(75.0));
        let op = Operation::new(vec![e.clone(), f.clone(), f.complement(), e.clone()]).unwrap();
        assert!(operation_orthocomplement(&op).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);

        let chain: Vec<Projection> = [12.0, 50.0, 100.0, 160.0]
            .iter()
            .map(|&d| Projection::at_angle(deg(d)))
            .collect();
        let op = Operation::new(chain.clone()).unwrap();
        let q = operation_orthocomplement(&op);
        assert!(q.max_abs_diff(&chain[0].complement()) < 1e-12);
    }

    #[test]
    fn orthocomplement_is_certain_exactly_off_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let factors: Vec<Projection> =
                (0..3).map(|_| random_projection(&mut rng, 4, 2)).collect();
            let op = Operation::new(factors).unwrap();
            let q = op.orthocomplement();
            // a state supported on R(Q) is off-domain and certain for Q
            let v: Vec<Complex64> = {
                let basis = q.column(0);
                let alt = q.column(1);
                basis.iter().zip(&alt).map(|(a, b)| a + b * 0.5).collect()
            };
            if v.iter().all(|z| z.norm() < 1e-9) {
                continue;
            }
            let rho = DensityState::pure(&v).unwrap();
            assert!(op.apply(&rho).is_err());
            assert!((rho.probability(&q) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn compatibility_examples() {
        let e = Projection::at_angle(0.0);
        assert!(are_compatible(&e, &e.complement()));
        let small = Projection::basis(3, 0);
        let big = Projection::onto_orthonormal(
            3,
            &[
                vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
                vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            ],
        );
        assert!(implies(&small, &big));
        assert!(are_compatible(&small, &big));
        // P(0) P(45) = [[1/2, 1/2], [0, 0]] while P(45) P(0) = [[1/2, 0], [1/2, 0]]
        assert!(!are_compatible(&e, &Projection::at_angle(FRAC_PI_4)));
    }

    #[test]
    fn meet_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = random_projection(&mut rng, 4, 2);
        assert!(meet(&e, &e).max_abs_diff(&e) < 1e-10);
        assert!(meet(&e, &e.complement()).is_zero(1e-10));
        let m = meet(&Projection::at_angle(0.3), &Projection::at_angle(1.1));
        assert!(m.is_zero(1e-12));
        let j = join(&Projection::at_angle(0.3), &Projection::at_angle(1.1));
        assert!(j.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn meet_of_compatible_pair_is_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let (e, f) = random_commuting_projections(&mut rng, 4);
            let m = meet(&e, &f);
            assert!(m.max_abs_diff(&(&*e * &*f)) < 1e-9);
        }
    }
}
