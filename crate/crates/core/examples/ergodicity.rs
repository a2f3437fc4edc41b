//! Integer relations among energy levels decide whether the time orbit is
//! dense in the diagonal torus.

use qslab::commutant::ergodicity_report;
use qslab::hilbert::{HermitianOp, DEFAULT_CLUSTER_TOL};

fn main() -> qslab::Result<()> {
    let cases: [(&str, Vec<f64>); 3] = [
        ("equally spaced", vec![0.0, 1.0, 2.0]),
        ("degenerate", vec![1.0, 1.0, 2.0]),
        ("irrational", vec![0.0, 1.0, 2f64.sqrt()]),
    ];
    for (name, levels) in cases {
        let r = ergodicity_report(&HermitianOp::from_real_diagonal(&levels), 10, 1e-6, DEFAULT_CLUSTER_TOL)?;
        println!("{name:>15}: {:?}, relations {:?}", r.verdict, r.relations_found);
    }
    Ok(())
}
