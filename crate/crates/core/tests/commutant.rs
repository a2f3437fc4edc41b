mod common;

use common::commutant_null_dim;
use proptest::prelude::*;
use qslab::commutant::*;
use qslab::hilbert::*;
use qslab::models::{build_ising_chain, build_random_spectrum, build_zurek, ZurekSpec};
use qslab::sampling::{gaussian_hermitian, rng};

#[test]
fn dimension_matches_null_space_on_reference_models() {
    let (ising, _) = build_ising_chain(2, 1.0, 1.0, false).unwrap();
    let (zurek, _) = build_zurek(&ZurekSpec::new(vec![1.0, 0.6])).unwrap();
    let cases = vec![
        HermitianOp::from_real_diagonal(&[1.0, 2.0, 3.0]),
        HermitianOp::from_real_diagonal(&[1.0, 1.0, 2.0]),
        HermitianOp::identity(3),
        ising,
        zurek,
    ];
    for h in cases {
        let cb = commutant_basis(&h, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(cb.dim_total, commutant_null_dim(&h));
        assert_eq!(cb.generators.len(), cb.dim_total);
    }
}

#[test]
fn identity_commutant_is_everything() {
    let cb = commutant_basis(&HermitianOp::identity(3), DEFAULT_CLUSTER_TOL).unwrap();
    assert_eq!(cb.dim_total, 9);
    match sample_commutant_unitary(&cb, 2, true) {
        CommutantSample::Sampled { orbit_distance, .. } => assert!(orbit_distance.unwrap() > EXCLUSION_THRESHOLD),
        other => panic!("{other:?}"),
    }
}

#[test]
fn orbit_distance_shrinks_with_longer_scans() {
    let h = HermitianOp::from_real_diagonal(&[0.0, 1.0, 2f64.sqrt()]);
    let cb = commutant_basis(&h, DEFAULT_CLUSTER_TOL).unwrap();
    let s = sample_commutant_unitary(&cb, 5, false).unitary().unwrap().clone();
    let (_, short) = orbit_approximation(&h, &s, 10.0, 10_000).unwrap();
    let (_, long) = orbit_approximation(&h, &s, 1e4, 10_000_000).unwrap();
    assert!(long <= short, "short {short} long {long}");
}

#[test]
fn rational_spectrum_has_periodic_orbit() {
    // diag(0,1,2) is 2π-periodic: a commutant element off the orbit stays off
    let h = HermitianOp::from_real_diagonal(&[0.0, 1.0, 2.0]);
    let cb = commutant_basis(&h, DEFAULT_CLUSTER_TOL).unwrap();
    let s = sample_commutant_unitary(&cb, 5, true).unitary().unwrap().clone();
    let (_, a) = orbit_approximation(&h, &s, 10.0, 20_001).unwrap();
    let (_, b) = orbit_approximation(&h, &s, 1000.0, 2_000_001).unwrap();
    assert!(a > EXCLUSION_THRESHOLD && (a - b).abs() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_spectra_match_null_space(seed in any::<u64>(), pattern in prop::sample::select(vec![
        vec![0.0, 1.0, 2.0, 3.0],
        vec![0.0, 0.0, 1.0, 1.0],
        vec![1.0, 1.0, 1.0, 2.5],
        vec![-1.0, 2.0, 2.0, 2.0, 5.0],
    ])) {
        let h = build_random_spectrum(&pattern, seed).unwrap();
        let cb = commutant_basis(&h, DEFAULT_CLUSTER_TOL).unwrap();
        prop_assert_eq!(cb.dim_total, commutant_null_dim(&h));
    }

    #[test]
    fn samples_lie_in_the_commutant(seed in any::<u64>()) {
        let h = gaussian_hermitian(4, &mut rng(seed));
        let cb = commutant_basis(&h, DEFAULT_CLUSTER_TOL).unwrap();
        let s = sample_commutant_unitary(&cb, seed, false);
        let u = s.unitary().unwrap();
        prop_assert!(unitarity_residual(u.matrix()) < UNIT_TOL);
        prop_assert!(commutator(u.matrix(), h.matrix()).norm() < 1e-9);
    }

    #[test]
    fn on_orbit_targets_are_recovered(seed in any::<u64>(), t in -3.0f64..3.0) {
        let h = gaussian_hermitian(3, &mut rng(seed));
        let target = evolve(&h, t, 1.0).compose(&UnitaryOp::global_phase(3, 0.4)).unwrap();
        let (_, d) = orbit_approximation(&h, &target, 4.0, 8001).unwrap();
        prop_assert!(d < 1e-6);
    }
}
