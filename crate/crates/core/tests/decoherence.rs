mod common;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use qslab::commutant::{commutant_basis, sample_commutant_unitary};
use qslab::decoherence::*;
use qslab::espace::reduced_state;
use qslab::hilbert::named::bell;
use qslab::hilbert::*;
use qslab::kstruct::canonical_tps_invariants;
use qslab::models::{build_zurek, ZurekSpec};
use qslab::sampling::{random_ket, rng};
use rand::Rng;

fn times(n: usize, t_end: f64) -> Vec<f64> {
    (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect()
}

/// `|a b̄| Π |cos(2 g_k t/ħ)|`, written out for `|+⟩` environments.
fn cosine_oracle(a: C, b: C, g: &[f64], t: f64) -> f64 {
    (a * b.conj()).norm() * g.iter().map(|g| (2.0 * g * t).cos().abs()).product::<f64>()
}

#[test]
fn four_spin_bath_against_cosines() {
    let mut r = rng(4);
    let g: Vec<f64> = (0..4).map(|_| r.random_range(0.2..1.5)).collect();
    let spec = ZurekSpec::new(g.clone());
    let (a, b) = (C::new(0.6, 0.0), C::new(0.0, 0.8));
    let psi = zurek_initial_state(a, b, 4).unwrap();
    let ts = times(200, 6.0);
    let tr = decoherence_trace(&spec, &psi, &ts).unwrap();
    assert!(tr.max_dev < 1e-10);
    for (t, o) in ts.iter().zip(&tr.offdiag) {
        assert!((o - cosine_oracle(a, b, &g, *t)).abs() < 1e-10);
    }
    assert!((tr.offdiag[0] - 0.48).abs() < 1e-14);
}

#[test]
fn pointer_gap_from_second_partial_trace_path() {
    let spec = ZurekSpec::new(vec![1.0, 0.7]);
    let psi = zurek_initial_state(C::new(0.6, 0.0), C::new(0.0, 0.8), 2).unwrap();
    let t = decohered_time(&spec);
    let (h, tps) = build_zurek(&spec).unwrap();
    let cb = commutant_basis(&h, DEFAULT_CLUSTER_TOL).unwrap();
    let w = sample_commutant_unitary(&cb, 4, false).unitary().unwrap().clone();
    let rep = pointer_dependence_with(&spec, &psi, &w, t).unwrap();

    // ρ_S(i,j) = ⟨ψ|iso′ (|j⟩⟨i| ⊗ I) iso′†|ψ⟩ with iso′ = W·iso
    let psi_t = psi.apply(&evolve(&h, t, 1.0)).unwrap();
    let iso = w.matrix() * tps.iso().matrix();
    let mut e10 = CMatrix::zeros(2, 2);
    e10[(1, 0)] = C::new(1.0, 0.0);
    let op = &iso * common::kron(&e10, &CMatrix::identity(4, 4)) * iso.adjoint();
    let v = psi_t.amplitudes();
    let rho01 = v.dotc(&(&op * v));
    assert!((rho01.norm() - rep.offdiag_rival).abs() < 1e-12);
    assert!(rep.gap > 1e-3);

    let phased = w.compose(&UnitaryOp::global_phase(8, 0.9)).unwrap();
    let rep2 = pointer_dependence_with(&spec, &psi, &phased, t).unwrap();
    assert!((rep.gap - rep2.gap).abs() < 1e-12);
}

#[test]
fn factorization_family_is_physically_varied() {
    let psi = random_ket(4, &mut rng(1));
    let (h, _) = build_zurek(&ZurekSpec::new(vec![1.0])).unwrap();
    let mut distinct = 0;
    for k in 0..100u64 {
        let a = &separable_factorization_family(&psi, 2 * k, 1).unwrap()[0];
        let b = &separable_factorization_family(&psi, 2 * k + 1, 1).unwrap()[0];
        let ia = canonical_tps_invariants(a, &[bell()], &h).unwrap();
        let ib = canonical_tps_invariants(b, &[bell()], &h).unwrap();
        if common::sup(&ia, &ib) > 1e-3 {
            distinct += 1;
        }
    }
    assert!(distinct >= 90, "{distinct}");
}

#[test]
fn canonical_completion_of_computational_state() {
    let tps = canonical_factorization(&Ket::basis(4, 0)).unwrap();
    let iso = tps.iso().matrix();
    // identity up to a phase per column
    for i in 0..4 {
        for j in 0..4 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((iso[(i, j)].norm() - expect).abs() < 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn traces_obey_the_closed_form(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let g: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
        let spec = ZurekSpec::new(g);
        let a = C::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let b = C::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let psi = zurek_initial_state(a, b, n).unwrap();
        let tr = decoherence_trace(&spec, &psi, &times(40, 5.0)).unwrap();
        prop_assert!(tr.max_dev < 1e-10);
        prop_assert!(tr.diagonal_drift < 1e-10);
        prop_assert!(tr.offdiag.iter().all(|&o| o <= tr.offdiag[0] + 1e-12));
    }

    #[test]
    fn family_members_keep_psi_separable(seed in any::<u64>()) {
        let psi = random_ket(4, &mut rng(seed ^ 0x5a5a));
        for tps in separable_factorization_family(&psi, seed, 4).unwrap() {
            let top = reduced_state(&psi, &tps, &[0]).unwrap().eigenvalues()[1];
            prop_assert!(top > 1.0 - 1e-10);
        }
    }
}
