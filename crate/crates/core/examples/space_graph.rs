//! Emergent geometry from mutual information, printed as DOT.

use qslab::espace::{interaction_graph, space_graph, DEFAULT_COEFF_FLOOR, DEFAULT_MI_FLOOR};
use qslab::hilbert::Propagator;
use qslab::hilbert::{named, Ket};
use qslab::models::build_ising_chain;

fn main() -> qslab::Result<()> {
    let (h, tps) = build_ising_chain(4, 1.0, 0.7, true)?;
    println!("interaction edges {:?}", interaction_graph(&h, &tps, DEFAULT_COEFF_FLOOR)?.edge_set());

    // quench from a product state and look at correlations after a while
    let psi0 = Ket::basis(16, 0);
    let psi = Propagator::new(&h).evolve_ket(&psi0, 1.3, 1.0);
    let g = space_graph(&h, &tps, &psi, DEFAULT_MI_FLOOR)?;
    println!("I_max {:.4}, monotone {}", g.i_max, g.is_distance_monotone());
    print!("{}", g.to_dot());

    let ghz = space_graph(&h, &tps, &named::ghz(4), DEFAULT_MI_FLOOR)?;
    println!("GHZ pair information {:.6} (ln 2 = {:.6})", ghz.mi_matrix[0][1], std::f64::consts::LN_2);
    Ok(())
}
