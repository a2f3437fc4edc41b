//! Distinguishability, invariant profiles and rival structures.
//!
//! Convention: the rival of `s` under a commutant unitary `W` is `W[s]`, the
//! structure with operators `W·A·W†`. Its expectations in `ψ` equal the
//! original's expectations in `W⁻¹ψ`. Passive time travel uses the same
//! convention with `W = U(t)`.

use serde::Serialize;
use serde_json::{json, Value};

use crate::commutant::{commutant_basis, sample_commutant_unitary, CommutantSample};
use crate::error::{QsError, Result};
use crate::espace::{locality_degree, DEFAULT_COEFF_FLOOR};
use crate::hilbert::{
    commutator, conjugate, evolve, spectral_decompose, HermitianOp, Ket, UnitaryOp, DEFAULT_CLUSTER_TOL,
};
use crate::kstruct::{check_kind, matrix_to_json, transform_structure, ConditionReport, KStructure, KindSpec, Tps};
use crate::sampling::{haar_unitary, rng};

/// Largest `‖[W, H]‖_F` accepted for a witness.
pub const WITNESS_COMMUTATOR_TOL: f64 = 1e-8;

/// Eigenspace populations `p_i = ‖P_i ψ‖²` of both states and their gaps;
/// the flag is set when some gap exceeds `tol`.
pub fn distinguishes(a: &HermitianOp, psi: &Ket, psi2: &Ket, tol: f64) -> Result<(bool, Vec<f64>)> {
    if psi.dim() != a.dim() || psi2.dim() != a.dim() {
        return Err(QsError::arg("state and operator dimensions differ"));
    }
    let sd = spectral_decompose(a, DEFAULT_CLUSTER_TOL)?;
    let gaps: Vec<f64> = sd.projectors.iter().map(|p| (psi.expectation(p) - psi2.expectation(p)).abs()).collect();
    Ok((gaps.iter().any(|&g| g > tol), gaps))
}

/// Sorted expectation values `⟨ψ|A_α|ψ⟩`.
pub fn structure_invariant(s: &KStructure, psi: &Ket) -> Result<Vec<f64>> {
    if s.dim() != psi.dim() {
        return Err(QsError::arg(format!("structure dim {} vs state dim {}", s.dim(), psi.dim())));
    }
    let mut v: Vec<f64> = s.ops.iter().map(|a| psi.expectation(a)).collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Sorted pairwise moments `Re⟨ψ|A_α A_β|ψ⟩` for `α ≤ β`. Finer than the
/// expectation profile when that profile is degenerate.
pub fn structure_moments(s: &KStructure, psi: &Ket) -> Result<Vec<f64>> {
    if s.dim() != psi.dim() {
        return Err(QsError::arg(format!("structure dim {} vs state dim {}", s.dim(), psi.dim())));
    }
    let images: Vec<_> = s.ops.iter().map(|a| a.matrix() * psi.amplitudes()).collect();
    let mut v = Vec::new();
    for (i, ai) in images.iter().enumerate() {
        for aj in &images[i..] {
            v.push(ai.dotc(aj).re);
        }
    }
    v.sort_by(f64::total_cmp);
    Ok(v)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum InvariantMode {
    #[default]
    Expectations,
    Moments,
}

fn invariant(s: &KStructure, psi: &Ket, mode: InvariantMode) -> Result<Vec<f64>> {
    match mode {
        InvariantMode::Expectations => structure_invariant(s, psi),
        InvariantMode::Moments => structure_moments(s, psi),
    }
}

fn check_witness(h: &HermitianOp, w: &UnitaryOp) -> Result<()> {
    if w.dim() != h.dim() {
        return Err(QsError::arg(format!("witness dim {} vs hamiltonian dim {}", w.dim(), h.dim())));
    }
    let c = commutator(w.matrix(), h.matrix()).norm();
    if c >= WITNESS_COMMUTATOR_TOL {
        return Err(QsError::arg(format!("witness does not commute with the hamiltonian (‖[W,H]‖ = {c:.3e})")));
    }
    Ok(())
}

/// `W[s]` for a state-independent structure. `W` must commute with `h`.
pub fn rival_structure(h: &HermitianOp, s: &KStructure, witness: &UnitaryOp) -> Result<KStructure> {
    if s.state_dependent {
        return Err(QsError::arg("state-dependent structure: use rival_structure_for_state with its builder"));
    }
    check_witness(h, witness)?;
    transform_structure(s, witness)
}

/// Rival of a structure that is built from the state itself: the structure
/// the builder assigns to `W⁻¹ψ`, carried forward by `W`.
pub fn rival_structure_for_state<F>(h: &HermitianOp, builder: F, psi: &Ket, witness: &UnitaryOp) -> Result<KStructure>
where
    F: Fn(&Ket) -> Result<KStructure>,
{
    check_witness(h, witness)?;
    let moved = psi.apply(&witness.inverse())?;
    transform_structure(&builder(&moved)?, witness)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum WitnessClass {
    TimeEvolution(f64),
    CommutantGeneric(u64),
    GlobalPhase,
}

/// A commutant unitary tagged with how it was obtained.
#[derive(Clone, Debug)]
pub struct Witness {
    pub unitary: UnitaryOp,
    pub class: WitnessClass,
}

impl Witness {
    pub fn time(h: &HermitianOp, t: f64, hbar: f64) -> Self {
        Self { unitary: evolve(h, t, hbar), class: WitnessClass::TimeEvolution(t) }
    }

    pub fn phase(dim: usize, theta: f64) -> Self {
        Self { unitary: UnitaryOp::global_phase(dim, theta), class: WitnessClass::GlobalPhase }
    }

    /// Seeded commutant sample; `None` when off-orbit exclusion is requested
    /// but unavailable.
    pub fn commutant(h: &HermitianOp, seed: u64, exclude_time_orbit: bool) -> Result<Option<Self>> {
        let cb = commutant_basis(h, DEFAULT_CLUSTER_TOL)?;
        Ok(sample_commutant_unitary(&cb, seed, exclude_time_orbit)
            .unitary()
            .map(|u| Self { unitary: u.clone(), class: WitnessClass::CommutantGeneric(seed) }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    DistinctStructures,
    EquivalentUnderGP,
    /// Gap between the equivalence and distinctness thresholds.
    Inconclusive,
    NotApplicable,
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub model_id: String,
    pub structure_kind: KindSpec,
    pub witness: UnitaryOp,
    pub witness_class: WitnessClass,
    pub kind_check_original: ConditionReport,
    pub kind_check_rival: ConditionReport,
    pub invariant_original: Vec<f64>,
    pub invariant_rival: Vec<f64>,
    pub max_invariant_gap: f64,
    pub verdict: Verdict,
    /// Set by [`alternative_reality`]: whether `h` cannot tell `ψ` from `W⁻¹ψ`.
    pub h_indistinguishable: Option<bool>,
    pub note: Option<String>,
}

impl Certificate {
    pub fn with_model_id(mut self, id: impl Into<String>) -> Self {
        self.model_id = id.into();
        self
    }

    pub fn to_json(&self, full: bool) -> Value {
        let mut v = json!({
            "model": self.model_id,
            "kind": self.structure_kind.tag_names(),
            "witness_class": self.witness_class,
            "gap": self.max_invariant_gap,
            "verdict": self.verdict,
            "invariants": {"original": self.invariant_original, "rival": self.invariant_rival},
            "kind_checks": {
                "original": {"passed": self.kind_check_original.passed(), "max_residual": finite_or_null(self.kind_check_original.max_residual())},
                "rival": {"passed": self.kind_check_rival.passed(), "max_residual": finite_or_null(self.kind_check_rival.max_residual())},
            },
        });
        if let Some(b) = self.h_indistinguishable {
            v["h_indistinguishable"] = json!(b);
        }
        if let Some(n) = &self.note {
            v["note"] = json!(n);
        }
        if full {
            v["witness"] = matrix_to_json(self.witness.matrix());
        }
        v
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() { json!(x) } else { Value::Null }
}

fn verdict_for(gap: f64, tol: f64) -> Verdict {
    if gap > 10.0 * tol {
        Verdict::DistinctStructures
    } else if gap <= tol {
        Verdict::EquivalentUnderGP
    } else {
        Verdict::Inconclusive
    }
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Builds `W[s]`, checks both structures against the kind and compares
/// their sorted expectation profiles in `psi`.
pub fn certify_nonuniqueness(h: &HermitianOp, s: &KStructure, psi: &Ket, witness: &Witness) -> Result<Certificate> {
    certify_nonuniqueness_with(h, s, psi, witness, InvariantMode::Expectations)
}

pub fn certify_nonuniqueness_with(
    h: &HermitianOp,
    s: &KStructure,
    psi: &Ket,
    witness: &Witness,
    mode: InvariantMode,
) -> Result<Certificate> {
    if psi.dim() != h.dim() || s.dim() != h.dim() {
        return Err(QsError::arg("structure, state and hamiltonian dimensions must agree"));
    }
    let rival = rival_structure(h, s, &witness.unitary)?;
    let kind_check_original = check_kind(s);
    let kind_check_rival = check_kind(&rival);
    let invariant_original = invariant(s, psi, mode)?;
    let invariant_rival = invariant(&rival, psi, mode)?;
    let gap = sup_gap(&invariant_original, &invariant_rival);
    let verdict = if kind_check_original.passed() && kind_check_rival.passed() {
        verdict_for(gap, s.kind.tolerance)
    } else {
        Verdict::NotApplicable
    };
    Ok(Certificate {
        model_id: "custom".into(),
        structure_kind: s.kind.clone(),
        witness: witness.unitary.clone(),
        witness_class: witness.class.clone(),
        kind_check_original,
        kind_check_rival,
        invariant_original,
        invariant_rival,
        max_invariant_gap: gap,
        verdict,
        h_indistinguishable: None,
        note: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TimeTravelReport {
    pub t: f64,
    /// `|⟨ṽ_x|ψ0⟩|` in the rival basis `U(t)[basis]`.
    pub rival_components: Vec<f64>,
    /// `|⟨v_x|U(−t)ψ0⟩|` in the original basis.
    pub evolved_components: Vec<f64>,
    pub residual: f64,
}

fn check_full_rank1_pvm(basis: &KStructure) -> Result<()> {
    let report = check_kind(&basis.clone().with_kind(KindSpec::pvm()));
    if !report.passed() || basis.len() != basis.dim() {
        return Err(QsError::arg(format!(
            "time travel needs a full rank-1 PVM ({} operators on dim {}; {})",
            basis.len(),
            basis.dim(),
            report.summary()
        )));
    }
    Ok(())
}

/// Components of `psi0` in the rival basis `U(t)[basis]` against components
/// of the back-evolved state `U(−t)·psi0` in the original basis.
///
/// The rival side is read off the rotated projectors, which fix components
/// only up to phase, so both sides are compared as magnitudes.
pub fn passive_time_travel(h: &HermitianOp, basis: &KStructure, psi0: &Ket, t: f64, hbar: f64) -> Result<TimeTravelReport> {
    check_full_rank1_pvm(basis)?;
    if psi0.dim() != h.dim() || basis.dim() != h.dim() {
        return Err(QsError::arg("basis, state and hamiltonian dimensions must agree"));
    }
    let rival = transform_structure(basis, &evolve(h, t, hbar))?;
    let rival_components: Vec<f64> = rival.ops.iter().map(|p| psi0.expectation(p).max(0.0).sqrt()).collect();
    let back = psi0.apply(&evolve(h, -t, hbar))?;
    let evolved_components: Vec<f64> =
        basis.basis_vectors()?.iter().map(|v| v.inner(&back).norm()).collect();
    let residual = sup_gap(&rival_components, &evolved_components);
    Ok(TimeTravelReport { t, rival_components, evolved_components, residual })
}

/// Certificate for a seeded off-orbit commutant witness, plus whether the
/// Hamiltonian's eigenspace populations separate `ψ0` from `W⁻¹ψ0`.
pub fn alternative_reality(h: &HermitianOp, basis: &KStructure, psi0: &Ket, seed: u64) -> Result<Certificate> {
    let cb = commutant_basis(h, DEFAULT_CLUSTER_TOL)?;
    match sample_commutant_unitary(&cb, seed, true) {
        CommutantSample::Sampled { unitary, .. } => {
            alternative_reality_with(h, basis, psi0, Witness { unitary, class: WitnessClass::CommutantGeneric(seed) })
        }
        CommutantSample::NotAvailable { reason } => {
            let report = check_kind(basis);
            let inv = structure_invariant(basis, psi0)?;
            Ok(Certificate {
                model_id: "custom".into(),
                structure_kind: basis.kind.clone(),
                witness: UnitaryOp::identity(h.dim()),
                witness_class: WitnessClass::CommutantGeneric(seed),
                kind_check_original: report.clone(),
                kind_check_rival: report,
                invariant_original: inv.clone(),
                invariant_rival: inv,
                max_invariant_gap: 0.0,
                verdict: Verdict::NotApplicable,
                h_indistinguishable: None,
                note: Some(reason),
            })
        }
    }
}

/// [`alternative_reality`] with a caller-chosen witness.
pub fn alternative_reality_with(h: &HermitianOp, basis: &KStructure, psi0: &Ket, witness: Witness) -> Result<Certificate> {
    let mut cert = certify_nonuniqueness(h, basis, psi0, &witness)?;
    let moved = psi0.apply(&witness.unitary.inverse())?;
    let (separates, _) = distinguishes(h, psi0, &moved, 1e-9)?;
    cert.h_indistinguishable = Some(!separates);
    Ok(cert)
}

#[derive(Clone, Debug, Serialize)]
pub struct LawsReport {
    pub d_original: usize,
    pub d_conjugated: usize,
    /// ∞-norm distance between the sorted spectra of `h` and `VhV†`.
    pub spectral_deviation: f64,
}

/// Locality degree of `h` and of `V·h·V†` for a seeded Haar-like `V`, both
/// read in the same TPS.
pub fn alternative_laws(h: &HermitianOp, tps: &Tps, seed: u64) -> Result<LawsReport> {
    let v = haar_unitary(h.dim(), &mut rng(seed));
    alternative_laws_with(h, tps, &v)
}

pub fn alternative_laws_with(h: &HermitianOp, tps: &Tps, v: &UnitaryOp) -> Result<LawsReport> {
    if tps.total_dim() != h.dim() {
        return Err(QsError::arg("tps and hamiltonian dimensions differ"));
    }
    let hv = conjugate(h, v)?;
    let spectral_deviation = sup_gap(&h.eigenvalues(), &hv.eigenvalues());
    if spectral_deviation > 1e-9 {
        return Err(QsError::Internal(format!("conjugation moved the spectrum by {spectral_deviation:.3e}")));
    }
    Ok(LawsReport {
        d_original: locality_degree(h, tps, DEFAULT_COEFF_FLOOR)?,
        d_conjugated: locality_degree(&hv, tps, DEFAULT_COEFF_FLOOR)?,
        spectral_deviation,
    })
}
