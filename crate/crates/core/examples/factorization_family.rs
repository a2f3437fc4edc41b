//! Any two-qubit state is a product state in some factorization.

use qslab::decoherence::{canonical_factorization, separable_factorization_family};
use qslab::espace::{mutual_information, reduced_state};
use qslab::hilbert::named;
use qslab::kstruct::Tps;

fn main() -> qslab::Result<()> {
    let bell = named::bell();
    println!("native mutual information {:.4}", mutual_information(&bell, &Tps::qubits(2), &[0], &[1])?);
    for (k, tps) in separable_factorization_family(&bell, 17, 4)?.iter().enumerate() {
        let top = reduced_state(&bell, tps, &[0])?.eigenvalues()[1];
        let mi = mutual_information(&bell, tps, &[0], &[1])?;
        println!("factorization {k}: top Schmidt weight {top:.12}, mutual information {mi:.1e}");
    }
    let canonical = canonical_factorization(&bell)?;
    println!("canonical factorization dims {:?}", canonical.factor_dims());
    Ok(())
}
