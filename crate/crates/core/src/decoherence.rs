//! Spin-bath decoherence and the dependence of a subsystem on its
//! factorization.
//!
//! For `H = σz_S ⊗ Σ_k g_k σz_k` and a product initial state
//! `(a|0⟩ + b|1⟩) ⊗ ⊗_k (α_k|0⟩ + β_k|1⟩)` the system coherence is
//!
//! `ρ_S(t)₀₁ = a·b̄ · Π_k (|α_k|² e^{−2i g_k t/ħ} + |β_k|² e^{2i g_k t/ħ})`,
//!
//! which for `|+⟩` environments reduces to `a·b̄ · Π_k cos(2 g_k t/ħ)`.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::commutant::{commutant_basis, sample_commutant_unitary};
use crate::error::{QsError, Result};
use crate::espace::reduced_state;
use crate::hilbert::{check_dims, CMatrix, CVector, Ket, Propagator, UnitaryOp, C64, DEFAULT_CLUSTER_TOL};
use crate::kstruct::Tps;
use crate::models::{build_zurek, ZurekSpec};
use crate::sampling::{random_ket, rng};

/// Largest `1 − tr ρ_q²` over single-qubit marginals accepted as a product state.
pub const PRODUCT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct DecoherenceTrace {
    pub times: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub oracle: Vec<f64>,
    pub max_dev: f64,
    /// Largest change of the pointer populations `ρ_S(t)₀₀` over the trace.
    pub diagonal_drift: f64,
}

impl DecoherenceTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,offdiag,oracle\n");
        for ((t, o), p) in self.times.iter().zip(&self.offdiag).zip(&self.oracle) {
            out.push_str(&format!("{t:.17e},{o:.17e},{p:.17e}\n"));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "times": self.times,
            "offdiag": self.offdiag,
            "oracle": self.oracle,
            "max_dev": self.max_dev,
            "diagonal_drift": self.diagonal_drift,
        })
    }
}

/// Single-qubit marginals of a product state, or an argument error.
fn product_marginals(psi: &Ket, n: usize) -> Result<Vec<CMatrix>> {
    let tps = Tps::qubits(n);
    (0..n)
        .map(|q| {
            let rho = reduced_state(psi, &tps, &[q])?.into_matrix();
            let purity = (&rho * &rho).trace().re;
            if 1.0 - purity > PRODUCT_TOL {
                return Err(QsError::arg(format!(
                    "initial state is not a product state (qubit {q} purity {purity:.12})"
                )));
            }
            Ok(rho)
        })
        .collect()
}

/// Closed-form `|ρ_S(t)₀₁|` from the initial single-qubit marginals.
pub fn zurek_oracle(spec: &ZurekSpec, marginals: &[CMatrix], t: f64) -> f64 {
    let coherence = marginals[0][(0, 1)].norm();
    let factor: C64 = spec
        .couplings
        .iter()
        .zip(&marginals[1..])
        .map(|(g, rho)| {
            let w0 = rho[(0, 0)].re;
            let w1 = rho[(1, 1)].re;
            C64::from_polar(w0, -2.0 * g * t / spec.hbar) + C64::from_polar(w1, 2.0 * g * t / spec.hbar)
        })
        .product();
    coherence * factor.norm()
}

/// Exact unitary evolution of `psi0` under the spin-bath Hamiltonian,
/// sampled at `times`, against the closed form.
pub fn decoherence_trace(spec: &ZurekSpec, psi0: &Ket, times: &[f64]) -> Result<DecoherenceTrace> {
    let (h, tps) = build_zurek(spec)?;
    check_dims(psi0.dim(), h.dim(), "initial state", "spin-bath model")?;
    let marginals = product_marginals(psi0, tps.factor_count())?;
    let prop = Propagator::new(&h);
    let samples: Vec<(f64, f64, f64)> = times
        .par_iter()
        .map(|&t| {
            let psi_t = prop.evolve_ket(psi0, t, spec.hbar);
            let rho = reduced_state(&psi_t, &tps, &[0]).expect("dims checked");
            (rho.matrix()[(0, 1)].norm(), rho.matrix()[(0, 0)].re, zurek_oracle(spec, &marginals, t))
        })
        .collect();
    let offdiag: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let oracle: Vec<f64> = samples.iter().map(|s| s.2).collect();
    let p0 = marginals[0][(0, 0)].re;
    let diagonal_drift = samples.iter().map(|s| (s.1 - p0).abs()).fold(0.0, f64::max);
    let max_dev = offdiag.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(DecoherenceTrace { times: times.to_vec(), offdiag, oracle, max_dev, diagonal_drift })
}

/// `(a|0⟩ + b|1⟩) ⊗ |+⟩^⊗n_env`
pub fn zurek_initial_state(a: C64, b: C64, n_env: usize) -> Result<Ket> {
    let sys = Ket::normalized(CVector::from_vec(vec![a, b]))?;
    let plus = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let mut v = sys.amplitudes().clone();
    for _ in 0..n_env {
        v = v.kronecker(&CVector::from_vec(vec![plus, plus]));
    }
    Ket::normalized(v)
}

/// The time `π/(4·max g)` at which the slowest-decaying factor is switched off.
pub fn decohered_time(spec: &ZurekSpec) -> f64 {
    let g = spec.couplings.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    std::f64::consts::PI * spec.hbar / (4.0 * g)
}

const GS_FLOOR: f64 = 1e-6;

fn tps_from_columns(cols: Vec<CVector>) -> Result<Tps> {
    let iso = CMatrix::from_columns(&cols);
    Tps::new(vec![2, 2], UnitaryOp::new(iso)?)
}

fn complete_basis(psi: &Ket, mut candidate: impl FnMut() -> CVector) -> Result<Tps> {
    let mut cols = vec![psi.amplitudes().clone()];
    let mut tries = 0;
    while cols.len() < 4 {
        tries += 1;
        if tries > 1000 {
            return Err(QsError::Internal("basis completion did not converge".into()));
        }
        let mut v = candidate();
        for u in &cols {
            v -= u * u.dotc(&v);
        }
        // second pass keeps the columns orthonormal to machine precision
        for u in &cols {
            v -= u * u.dotc(&v);
        }
        let n = v.norm();
        if n > GS_FLOOR {
            cols.push(v / C64::from(n));
        }
    }
    tps_from_columns(cols)
}

/// Two-qubit factorizations of a 4-dimensional space in which `psi` is
/// `|0_S 0_E⟩`: each member's identification map has `psi` as its first
/// column and a seeded random orthonormal completion. Near-dependent
/// candidate columns are redrawn.
pub fn separable_factorization_family(psi: &Ket, seed: u64, count: usize) -> Result<Vec<Tps>> {
    if count < 1 {
        return Err(QsError::arg("count must be at least 1"));
    }
    if psi.dim() != 4 {
        return Err(QsError::arg(format!("factorization family needs dim 4, got {}", psi.dim())));
    }
    let mut r = rng(seed);
    (0..count).map(|_| complete_basis(psi, || random_ket(4, &mut r).amplitudes().clone())).collect()
}

/// The member completed with computational basis vectors in order.
pub fn canonical_factorization(psi: &Ket) -> Result<Tps> {
    if psi.dim() != 4 {
        return Err(QsError::arg(format!("factorization family needs dim 4, got {}", psi.dim())));
    }
    let mut next = 0;
    complete_basis(psi, || {
        let v = Ket::basis(4, next % 4).amplitudes().clone();
        next += 1;
        v
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PointerReport {
    pub t: f64,
    pub offdiag_original: f64,
    pub offdiag_rival: f64,
    pub gap: f64,
}

impl PointerReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("plain struct")
    }
}

/// System coherence at `t` read in the native factorization and in the
/// rival factorization `W·iso`, with `W` a seeded commutant unitary.
pub fn pointer_dependence(spec: &ZurekSpec, psi0: &Ket, witness_seed: u64, t: f64) -> Result<PointerReport> {
    let (h, _) = build_zurek(spec)?;
    let cb = commutant_basis(&h, DEFAULT_CLUSTER_TOL)?;
    let w = sample_commutant_unitary(&cb, witness_seed, false)
        .unitary()
        .cloned()
        .ok_or_else(|| QsError::Internal("unrestricted commutant sampling failed".into()))?;
    pointer_dependence_with(spec, psi0, &w, t)
}

pub fn pointer_dependence_with(spec: &ZurekSpec, psi0: &Ket, witness: &UnitaryOp, t: f64) -> Result<PointerReport> {
    let (h, tps) = build_zurek(spec)?;
    check_dims(psi0.dim(), h.dim(), "initial state", "spin-bath model")?;
    product_marginals(psi0, tps.factor_count())?;
    let psi_t = Propagator::new(&h).evolve_ket(psi0, t, spec.hbar);
    let rival = tps.conjugated(witness)?;
    let offdiag_original = reduced_state(&psi_t, &tps, &[0])?.matrix()[(0, 1)].norm();
    let offdiag_rival = reduced_state(&psi_t, &rival, &[0])?.matrix()[(0, 1)].norm();
    Ok(PointerReport { t, offdiag_original, offdiag_rival, gap: (offdiag_rival - offdiag_original).abs() })
}
