//! Reading a state in the basis `U(t)[basis]` reproduces the statistics of
//! the state evolved backwards by `t`.

use qslab::kstruct::computational_basis_structure;
use qslab::models::{build_nrqm_lattice, NrqmLatticeSpec, Potential};
use qslab::relevance::passive_time_travel;
use qslab::sampling::{random_ket, rng};

fn main() -> qslab::Result<()> {
    let spec = NrqmLatticeSpec {
        particles: 2,
        sites: 3,
        masses: vec![1.0, 2.0],
        hbar: 1.0,
        potential: Potential::CoulombRegularized { strength: 1.0 },
    };
    let (h, _) = build_nrqm_lattice(&spec)?;
    let basis = computational_basis_structure(h.dim());
    let psi0 = random_ket(h.dim(), &mut rng(3));
    for t in [0.5, 2.0, -4.0] {
        let rep = passive_time_travel(&h, &basis, &psi0, t, spec.hbar)?;
        println!("t = {t:>5}: residual {:.2e}", rep.residual);
        println!("  rival   {:.4?}", rep.rival_components);
        println!("  evolved {:.4?}", rep.evolved_components);
    }
    Ok(())
}
