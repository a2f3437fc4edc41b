//! Discrete coherent states on a ring: frame quality and a rival family.

use qslab::commutant::{commutant_basis, sample_commutant_unitary};
use qslab::espace::{coherent_family, rival_coherent_family};
use qslab::hilbert::DEFAULT_CLUSTER_TOL;
use qslab::kstruct::{check_kind, computational_basis_structure};
use qslab::models::build_random_spectrum;

fn main() -> qslab::Result<()> {
    let fam = coherent_family(12, 1.0)?;
    let (c, residual) = fam.frame_residual();
    println!("{} states, frame constant {c:.4}, relative residual {residual:.2e}", fam.dim());
    println!("POVM conditions hold: {}", check_kind(&fam.povm_structure()).passed());

    let levels: Vec<f64> = (0..12).map(|k| (k as f64).sqrt()).collect();
    let h = build_random_spectrum(&levels, 4)?;
    let w = sample_commutant_unitary(&commutant_basis(&h, DEFAULT_CLUSTER_TOL)?, 9, false);
    let rival = rival_coherent_family(&fam, w.unitary().expect("unrestricted sample"))?;
    let basis = computational_basis_structure(12);
    let (a, b) = (fam.expectation_profile(&basis), rival.expectation_profile(&basis));
    println!("position profile of state 0: {:.3?}", &a[0][..6]);
    println!("rival profile of state 0:    {:.3?}", &b[0][..6]);
    Ok(())
}
