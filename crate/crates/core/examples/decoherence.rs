//! Spin-bath decoherence against the closed-form envelope, and how the
//! pointer reading depends on the chosen factorization.

use qslab::decoherence::{decoherence_trace, decohered_time, pointer_dependence, zurek_initial_state};
use qslab::hilbert::C64;
use qslab::models::ZurekSpec;

fn main() -> qslab::Result<()> {
    let spec = ZurekSpec::new(vec![1.0, 0.7, 0.45, 0.3]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = zurek_initial_state(C64::from(h), C64::from(h), 4)?;
    let times: Vec<f64> = (0..9).map(|k| 0.25 * k as f64).collect();
    let trace = decoherence_trace(&spec, &psi, &times)?;
    print!("{}", trace.to_csv());
    println!("max deviation from oracle {:.1e}", trace.max_dev);

    let p = pointer_dependence(&spec, &psi, 3, decohered_time(&spec))?;
    println!("at t = {:.3}: native coherence {:.2e}, rival coherence {:.4}", p.t, p.offdiag_original, p.offdiag_rival);
    Ok(())
}
