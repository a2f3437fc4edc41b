//! A commutant unitary off the time orbit produces a rival basis that no
//! amount of waiting reaches.

use qslab::commutant::{commutant_basis, orbit_approximation};
use qslab::hilbert::DEFAULT_CLUSTER_TOL;
use qslab::kstruct::computational_basis_structure;
use qslab::models::build_ising_chain;
use qslab::relevance::{alternative_reality_with, Witness};
use qslab::sampling::{random_ket, rng};

fn main() -> qslab::Result<()> {
    let (h, _) = build_ising_chain(3, 1.0, 1.0, true)?;
    let cb = commutant_basis(&h, DEFAULT_CLUSTER_TOL)?;
    println!("commutant dimension {}, off-orbit directions: {}", cb.generators.len(), cb.has_off_orbit_directions());

    let Some(w) = Witness::commutant(&h, 5, true)? else {
        println!("no off-orbit witness for this Hamiltonian");
        return Ok(());
    };
    let (t, dist) = orbit_approximation(&h, &w.unitary, 100.0, 100_001)?;
    println!("closest time-evolution: t = {t:.3}, phase distance {dist:.3}");

    let psi = random_ket(8, &mut rng(11));
    let cert = alternative_reality_with(&h, &computational_basis_structure(8), &psi, w)?;
    println!("{:?}, gap {:.4}, H indistinguishable: {:?}", cert.verdict, cert.max_invariant_gap, cert.h_indistinguishable);
    Ok(())
}
