//! Rival basis from a time-evolution witness on a periodic Ising ring.

use qslab::hilbert::Ket;
use qslab::kstruct::computational_basis_structure;
use qslab::models::build_ising_chain;
use qslab::relevance::{certify_nonuniqueness, Witness};
use qslab::sampling::{random_ket, rng};

fn main() -> qslab::Result<()> {
    let (h, _) = build_ising_chain(3, 1.0, 1.0, true)?;
    let basis = computational_basis_structure(8);
    let psi: Ket = random_ket(8, &mut rng(7));

    for w in [Witness::time(&h, 1.0, 1.0), Witness::phase(8, 0.3)] {
        let cert = certify_nonuniqueness(&h, &basis, &psi, &w)?.with_model_id("ising3");
        println!("{:?}: {:?}, gap {:.4}", w.class, cert.verdict, cert.max_invariant_gap);
    }
    let cert = certify_nonuniqueness(&h, &basis, &psi, &Witness::time(&h, 1.0, 1.0))?.with_model_id("ising3");
    println!("{}", serde_json::to_string_pretty(&cert.to_json(false))?);
    Ok(())
}
