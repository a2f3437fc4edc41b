//! Defining conditions survive unitary conjugation, and constructors
//! report which conditions an invalid input breaks.

use qslab::hilbert::HermitianOp;
use qslab::QsError;
use qslab::kstruct::{check_kind, computational_basis_structure, make_pvm_structure, occupation_structure, transform_structure, Tps};
use qslab::sampling::{haar_unitary, rng};

fn main() -> qslab::Result<()> {
    let structures = [
        ("basis", computational_basis_structure(4)),
        ("occupation", occupation_structure(&Tps::qubits(2))?),
    ];
    let u = haar_unitary(4, &mut rng(1));
    for (name, s) in &structures {
        let before = check_kind(s);
        let after = check_kind(&transform_structure(s, &u)?);
        println!("{name}: passed {} -> {}, residual {:.1e}", before.passed(), after.passed(), after.max_residual());
    }

    // two copies of the same projector do not resolve the identity
    let p = HermitianOp::from_real_diagonal(&[1.0, 0.0]);
    let Err(QsError::KindViolation(report)) = make_pvm_structure(&[p.clone(), p]) else {
        unreachable!("constructor accepts only valid measurements");
    };
    println!("doubled projector rejected:");
    for e in &report.entries {
        println!("  {:<22} residual {:.2e}", e.tag.to_string(), e.residual);
    }
    Ok(())
}
