use proptest::prelude::*;
use sharpkit::povm::{
    classify, extend_to_programmable, is_rank_one, is_sharp, random_povm, random_sharp_povm,
    testing_region_contains, trivial_povm, ProgrammableDevice,
};
use sharpkit::random::{random_distribution, seeded_rng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_povms_validate(d in 1usize..4, n in 1usize..5, seed in 0u64..10_000) {
        let p = random_povm(d, n, seed).unwrap();
        prop_assert_eq!(p.outcomes(), n);
        prop_assert_eq!(p.dim(), d);
    }

    #[test]
    fn sharp_povms_fit_the_dimension(d in 1usize..4, n in 1usize..4, seed in 0u64..10_000) {
        prop_assume!(n <= d);
        let p = random_sharp_povm(d, n, seed).unwrap();
        let c = classify(&p).unwrap();
        prop_assert!(c.sharp && p.outcomes() <= p.dim());
        let vs = c.unit_eigenvectors.unwrap();
        prop_assert_eq!(vs.len(), n);
        if n == d {
            prop_assert!(c.projective && is_rank_one(&p));
        }
    }

    #[test]
    fn sharpness_matches_the_testing_region(d in 2usize..4, seed in 0u64..10_000, sharp in any::<bool>()) {
        let n = 2;
        let p = if sharp { random_sharp_povm(d, n, seed).unwrap() } else { random_povm(d, n, seed).unwrap() };
        let all_vertices = (0..n).all(|x| {
            let mut e = vec![0.0; n];
            e[x] = 1.0;
            testing_region_contains(&p, &e, 1e-7).unwrap().contains
        });
        prop_assert_eq!(is_sharp(&p), all_vertices);
    }

    #[test]
    fn reproduced_statistics_come_from_a_state(d in 2usize..4, n in 2usize..4, seed in 0u64..10_000) {
        let p = random_povm(d, n, seed).unwrap();
        let rho = sharpkit::random::random_density(d, seed + 1);
        let target: Vec<f64> = p.elements().iter().map(|e| e.inner(rho.op())).collect();
        let r = testing_region_contains(&p, &target, 1e-7).unwrap();
        prop_assert!(r.contains);
        let state = r.state.unwrap();
        for (e, t) in p.elements().iter().zip(&target) {
            prop_assert!((e.inner(state.op()) - t).abs() < 1e-6);
        }
    }

    #[test]
    fn programmable_extension_round_trips(d in 1usize..4, n in 1usize..4, seed in 0u64..10_000) {
        let p = random_povm(d, n, seed).unwrap();
        let dev = extend_to_programmable(&p);
        prop_assert_eq!(dev.slots().len(), n + 1);
        prop_assert_eq!(dev.base(), &p);
        prop_assert!(ProgrammableDevice::from_slots(dev.slots().to_vec()).is_ok());
    }

    #[test]
    fn trivial_povms_classify_as_trivial(d in 1usize..4, n in 1usize..4, seed in 0u64..10_000) {
        let t = trivial_povm(&random_distribution(n, &mut seeded_rng(seed)), d).unwrap();
        prop_assert!(classify(&t).unwrap().trivial);
    }
}
