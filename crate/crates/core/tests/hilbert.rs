mod common;

use common::{kron, real_embedding_eigenvalues, sup, trace_out_second};
use proptest::prelude::*;
use qslab::hilbert::named::{bell, hadamard, sigma_x, sigma_z};
use qslab::hilbert::*;
use qslab::kstruct::Tps;
use qslab::sampling::{gaussian_hermitian, haar_unitary, random_density, random_ket, rng};
use qslab::QsError;
use std::f64::consts::FRAC_PI_2;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn ket_rejects_unnormalized_amplitudes() {
    assert!(Ket::new(CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).is_err());
    assert!(Ket::new(CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)])).is_ok());
    let k = Ket::from_slice(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
    assert!((k.amplitudes().norm() - 1.0).abs() < 1e-15);
}

#[test]
fn operator_constructors_check_their_invariants() {
    let not_herm = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    assert!(matches!(HermitianOp::new(not_herm.clone()), Err(QsError::Argument(_))));
    assert!(UnitaryOp::new(not_herm).is_err());
}

#[test]
fn tensor_product_examples() {
    let i2 = HermitianOp::identity(2);
    let i4 = tensor_product(&[i2.clone(), i2.clone()]).unwrap();
    assert_eq!(i4.matrix(), &CMatrix::identity(4, 4));
    let zi = tensor_product(&[sigma_z(), i2]).unwrap();
    assert_eq!(zi, HermitianOp::from_real_diagonal(&[1.0, 1.0, -1.0, -1.0]));
    let k = tensor_product(&[Ket::basis(2, 0), Ket::basis(2, 1)]).unwrap();
    assert_eq!(k, Ket::basis(4, 1));
    assert!(tensor_product::<Ket>(&[]).is_err());
}

#[test]
fn tensor_product_matches_index_loop_kron() {
    let mut r = rng(5);
    let a = gaussian_hermitian(3, &mut r);
    let b = gaussian_hermitian(2, &mut r);
    let ab = tensor_product(&[a.clone(), b.clone()]).unwrap();
    assert!((ab.matrix() - kron(a.matrix(), b.matrix())).norm() < 1e-14);
}

#[test]
fn partial_trace_examples() {
    let tps = Tps::qubits(2);
    let reduced = partial_trace(&bell().projector(), &tps, &[0]).unwrap();
    assert!((reduced.matrix() - CMatrix::identity(2, 2) * c(0.5, 0.0)).norm() < 1e-15);

    let mut r = rng(9);
    let ra = random_density(2, &mut r);
    let rb = random_density(3, &mut r);
    let prod = tensor_product(&[ra.clone(), rb]).unwrap();
    let tps23 = Tps::computational(vec![2, 3]).unwrap();
    let back = partial_trace(&prod, &tps23, &[0]).unwrap();
    assert!((back.matrix() - ra.matrix()).norm() < 1e-14);

    let wrong = Tps::qubits(3);
    assert!(partial_trace(&prod, &wrong, &[0]).is_err());
}

#[test]
fn spectral_decompose_examples() {
    let sd = spectral_decompose(&HermitianOp::from_real_diagonal(&[1.0, 1.0, 2.0]), DEFAULT_CLUSTER_TOL).unwrap();
    assert_eq!(sd.eigenvalues, vec![1.0, 2.0]);
    assert_eq!(sd.multiplicities, vec![2, 1]);
    assert!((sd.projectors[0].matrix() - HermitianOp::from_real_diagonal(&[1.0, 1.0, 0.0]).matrix()).norm() < 1e-14);
    assert!((sd.projectors[1].matrix() - HermitianOp::from_real_diagonal(&[0.0, 0.0, 1.0]).matrix()).norm() < 1e-14);

    let sx = spectral_decompose(&sigma_x(), DEFAULT_CLUSTER_TOL).unwrap();
    assert!(sup(&sx.eigenvalues, &[-1.0, 1.0]) < 1e-14);
    assert_eq!(sx.multiplicities, vec![1, 1]);
}

#[test]
fn conjugation_examples() {
    let a = gaussian_hermitian(4, &mut rng(1));
    assert_eq!(conjugate(&a, &UnitaryOp::identity(4)).unwrap().matrix(), a.matrix());
    let x = conjugate(&sigma_z(), &hadamard()).unwrap();
    assert!((x.matrix() - sigma_x().matrix()).norm() < 1e-15);
    assert!(conjugate(&a, &UnitaryOp::identity(3)).is_err());
}

#[test]
fn evolve_examples() {
    let u = evolve(&sigma_z(), FRAC_PI_2, 1.0);
    let expect = CMatrix::from_row_slice(2, 2, &[c(0.0, -1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
    assert!((u.matrix() - expect).norm() < 1e-15);
    let h = gaussian_hermitian(6, &mut rng(4));
    assert!((evolve(&h, 0.0, 1.0).matrix() - CMatrix::identity(6, 6)).norm() < 1e-13);
    let round = evolve(&h, 1.3, 1.0).compose(&evolve(&h, -1.3, 1.0)).unwrap();
    assert!((round.matrix() - CMatrix::identity(6, 6)).norm() < 1e-12);
}

#[test]
fn eigenvalues_agree_with_real_embedding() {
    let h = gaussian_hermitian(7, &mut rng(12));
    assert!(sup(&h.eigenvalues(), &real_embedding_eigenvalues(h.matrix())) < 1e-10);
}

#[test]
fn bell_reduction_by_index_loop() {
    let rho = bell().projector();
    let r = trace_out_second(rho.matrix(), 2, 2);
    let ours = partial_trace(&rho, &Tps::qubits(2), &[0]).unwrap();
    assert!((ours.matrix() - r).norm() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conjugation_keeps_hermiticity_and_spectrum(seed in any::<u64>(), d in 1usize..9) {
        let mut r = rng(seed);
        let a = gaussian_hermitian(d, &mut r);
        let u = haar_unitary(d, &mut r);
        let b = conjugate(&a, &u).unwrap();
        prop_assert!(hermiticity_residual(b.matrix()) < 1e-10);
        prop_assert!(sup(&a.eigenvalues(), &b.eigenvalues()) < 1e-9);
    }

    #[test]
    fn spectral_reconstruction_and_projector_algebra(seed in any::<u64>(), d in 1usize..9, degenerate in any::<bool>()) {
        let mut r = rng(seed);
        let a = if degenerate {
            let u = haar_unitary(d, &mut r);
            let diag: Vec<f64> = (0..d).map(|i| (i / 2) as f64).collect();
            conjugate(&HermitianOp::from_real_diagonal(&diag), &u).unwrap()
        } else {
            gaussian_hermitian(d, &mut r)
        };
        let sd = spectral_decompose(&a, DEFAULT_CLUSTER_TOL).unwrap();
        let rel = (sd.reconstruct().matrix() - a.matrix()).norm() / a.matrix().norm().max(1.0);
        prop_assert!(rel < 1e-10);
        prop_assert_eq!(sd.multiplicities.iter().sum::<usize>(), d);
        let mut total = CMatrix::zeros(d, d);
        for (i, p) in sd.projectors.iter().enumerate() {
            prop_assert!((p.matrix() * p.matrix() - p.matrix()).norm() < 1e-10);
            for q in &sd.projectors[i + 1..] {
                prop_assert!((p.matrix() * q.matrix()).norm() < 1e-10);
            }
            total += p.matrix();
        }
        prop_assert!((total - CMatrix::identity(d, d)).norm() < 1e-10);
    }

    #[test]
    fn partial_trace_preserves_trace_and_positivity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density(12, &mut r);
        let tps = Tps::computational(vec![2, 3, 2]).unwrap();
        for keep in [vec![0], vec![1], vec![0, 2], vec![1, 2]] {
            let red = partial_trace(&rho, &tps, &keep).unwrap();
            prop_assert!((red.trace() - 1.0).abs() < 1e-12);
            prop_assert!(red.min_eigenvalue() > -1e-12);
        }
    }

    #[test]
    fn product_state_marginals_are_pure(seed in any::<u64>()) {
        let mut r = rng(seed);
        let parts = vec![random_ket(2, &mut r), random_ket(3, &mut r), random_ket(2, &mut r)];
        let psi = tensor_product(&parts).unwrap();
        let tps = Tps::computational(vec![2, 3, 2]).unwrap();
        for f in 0..3 {
            let red = partial_trace(&psi.projector(), &tps, &[f]).unwrap();
            prop_assert!(red.eigenvalues().last().copied().unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn evolution_group_law(seed in any::<u64>(), t1 in -5.0f64..5.0, t2 in -5.0f64..5.0) {
        let h = gaussian_hermitian(5, &mut rng(seed));
        let lhs = evolve(&h, t1, 1.0).compose(&evolve(&h, t2, 1.0)).unwrap();
        let rhs = evolve(&h, t1 + t2, 1.0);
        prop_assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-10);
        prop_assert!(unitarity_residual(rhs.matrix()) < UNIT_TOL);
        prop_assert!(commutator(rhs.matrix(), h.matrix()).norm() < 1e-10);
    }
}
