use ncpt_core::event_state::{
    apply_operation, are_compatible, classical_operation, measure_of, operation_orthocomplement,
    probe_states, ClassicalModel, EventSet, Operation,
};
use ncpt_core::linalg::{ComplexMatrix, DensityState, HermitianMatrix, Projection};
use ncpt_core::sampling::{
    random_commuting_projections, random_density_state, random_probability_vector, random_projection,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `U rho U^H / Tr[...]` by direct multiplication, for comparison.
fn direct_update(factors: &[Projection], rho: &DensityState) -> Option<ComplexMatrix> {
    let mut m: ComplexMatrix = (**rho.hermitian()).clone();
    for f in factors {
        m = &(&**f.hermitian() * &m) * &**f.hermitian();
    }
    let t = m.trace().re;
    (t > 1e-12).then(|| m.scale(1.0 / t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operation_matches_step_by_step_conditioning(seed in any::<u64>(), dim in 2usize..=4, len in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factors: Vec<Projection> = (0..len)
            .map(|_| { let r = rng.gen_range(1..dim); random_projection(&mut rng, dim, r) })
            .collect();
        let op = Operation::new(factors.clone()).unwrap();
        let rho = random_density_state(&mut rng, dim);
        let mut stepwise = Some(rho.clone());
        for f in &factors {
            stepwise = stepwise.and_then(|s| apply_operation(f, &s).ok());
        }
        match (op.apply(&rho), direct_update(&factors, &rho)) {
            (Ok(a), Some(b)) => {
                prop_assert!(a.max_abs_diff(&b) <= 1e-9);
                prop_assert!(stepwise.unwrap().max_abs_diff(&b) <= 1e-9);
            }
            (Err(_), None) => {}
            (a, b) => prop_assert!(false, "domain disagreement: {:?} vs {:?}", a.is_ok(), b.is_some()),
        }
    }

    #[test]
    fn rank_one_conditioning_collapses_to_the_event(seed in any::<u64>(), dim in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_projection(&mut rng, dim, 1);
        let rho = random_density_state(&mut rng, dim);
        let out = apply_operation(&e, &rho).unwrap();
        prop_assert!(out.max_abs_diff(&e) <= 1e-9);
    }

    #[test]
    fn equal_maps_stay_equal_after_reversal(seed in any::<u64>(), dim in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e, f) = random_commuting_projections(&mut rng, dim);
        let a = Operation::new(vec![e.clone(), f.clone()]).unwrap();
        let b = Operation::new(vec![f, e]).unwrap();
        prop_assert!(a.same_map_as(&b));
        prop_assert!(a.involution().same_map_as(&b.involution()));
    }

    #[test]
    fn orthocomplement_is_certain_exactly_outside_the_domain(seed in any::<u64>(), dim in 2usize..=4, len in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factors: Vec<Projection> = (0..len)
            .map(|_| { let r = rng.gen_range(1..dim); random_projection(&mut rng, dim, r) })
            .collect();
        let op = Operation::new(factors).unwrap();
        let perp = operation_orthocomplement(&op);
        // U annihilates the range of the orthocomplement and nothing else
        let killed = op.product() * &**perp.hermitian();
        prop_assert!(killed.max_abs() <= 1e-9);
        let rank_u = dim - perp.rank();
        let gram = HermitianMatrix::gram(op.product());
        let mut eig: Vec<f64> = ncpt_core::linalg::eig_hermitian(&gram).0;
        eig.sort_by(|a, b| b.total_cmp(a));
        prop_assert!(eig[..rank_u].iter().all(|&l| l > 1e-12));
    }

    #[test]
    fn compatibility_is_commutation(seed in any::<u64>(), dim in 2usize..=4, commuting in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e, f) = if commuting {
            random_commuting_projections(&mut rng, dim)
        } else {
            let r1 = rng.gen_range(1..dim);
            let r2 = rng.gen_range(1..dim);
            (random_projection(&mut rng, dim, r1), random_projection(&mut rng, dim, r2))
        };
        let ef = &**e.hermitian() * &**f.hermitian();
        let fe = &**f.hermitian() * &**e.hermitian();
        prop_assert_eq!(are_compatible(&e, &f), ef.max_abs_diff(&fe) <= 1e-10);
        if commuting {
            prop_assert!(are_compatible(&e, &f));
        }
    }

    #[test]
    fn classical_conditioning_commutes(seed in any::<u64>(), size in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let full = (1u64 << size) - 1;
        let e = rng.gen_range(1..=full);
        let f = rng.gen_range(1..=full);
        let mu = random_probability_vector(&mut rng, size);
        let model = ClassicalModel::new(size, vec![e, f], vec![mu.clone()]).unwrap();
        if measure_of(e & f, &mu) > 0.0 {
            let ef = classical_operation(&model, e, &classical_operation(&model, f, &mu).unwrap()).unwrap();
            let fe = classical_operation(&model, f, &classical_operation(&model, e, &mu).unwrap()).unwrap();
            let meet = classical_operation(&model, e & f, &mu).unwrap();
            for i in 0..size {
                prop_assert!((ef[i] - fe[i]).abs() <= 1e-12);
                prop_assert!((ef[i] - meet[i]).abs() <= 1e-12);
            }
        }
        prop_assert!(model.axiom_suite().all_passed);
    }
}

#[test]
fn angle_events_pass_the_axiom_suite() {
    let set = EventSet::from_angles(&[0.0, std::f64::consts::FRAC_PI_4, 1.0]).unwrap();
    let report = set.axiom_suite(probe_states(2));
    assert!(report.all_passed, "{:?}", report.failures().collect::<Vec<_>>());
}

#[test]
fn complementary_adjacent_pair_empties_the_domain() {
    let e = Projection::at_angle(0.3);
    let op = Operation::new(vec![Projection::at_angle(1.0), e.clone(), e.complement()]).unwrap();
    let perp = operation_orthocomplement(&op);
    assert!(perp.max_abs_diff(&ComplexMatrix::identity(2)) <= 1e-12);
    let v = [Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)];
    assert!(op.apply(&DensityState::pure(&v).unwrap()).is_err());
}
