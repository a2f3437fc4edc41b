//! Conjugating a Hamiltonian keeps its spectrum but not its locality.

use qslab::espace::{locality_degree, pauli_expand, DEFAULT_COEFF_FLOOR};
use qslab::models::build_ising_chain;
use qslab::relevance::alternative_laws;

fn main() -> qslab::Result<()> {
    let (h, tps) = build_ising_chain(3, 1.0, 1.0, true)?;
    println!("native locality {}", locality_degree(&h, &tps, DEFAULT_COEFF_FLOOR)?);
    println!("support weights {:?}", pauli_expand(&h, &tps)?.support_weights());
    for seed in 0..5 {
        let r = alternative_laws(&h, &tps, seed)?;
        println!("seed {seed}: d {} -> {}, spectral deviation {:.1e}", r.d_original, r.d_conjugated, r.spectral_deviation);
    }
    Ok(())
}
