//! Kinds and K-structures.
//!
//! A [`KStructure`] is a labeled family of Hermitian operators together with
//! the [`KindSpec`] it claims to satisfy. Kinds are drawn from a closed set of
//! condition tags, each an equality or positivity predicate that is invariant
//! under simultaneous unitary conjugation of every operator involved.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{QsError, Result};
use crate::espace::{pauli_expand, reduced_state};
use crate::hilbert::{
    check_dims, commutator, spectral_norm, spectral_decompose, tensor_product, CMatrix, HermitianOp, Ket, UnitaryOp,
    C64, DEFAULT_CLUSTER_TOL,
};
use crate::sampling::{gaussian_hermitian, rng};

pub const DEFAULT_KIND_TOL: f64 = 1e-9;

/// One defining condition of a kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionTag {
    /// `A² − A = 0` for every operator.
    Projector,
    /// `A_α A_β = 0` for distinct labels.
    PairwiseOrthogonal,
    /// `Σ A_α = I`.
    ResolutionOfIdentity,
    /// `A_α ≥ 0`.
    PositiveSemidefinite,
    /// `tr A_α − 1 = 0`.
    UnitTrace,
    /// `[A_α, A_β] = 0` for operators in distinct commutation groups.
    MutualCommutation,
    /// The attached Hamiltonian has no component acting on more than `d`
    /// factors of the attached tensor product structure.
    DLocal(usize),
}

impl fmt::Display for ConditionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionTag::DLocal(d) => write!(f, "DLocal({d})"),
            other => write!(f, "{other:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindSpec {
    pub conditions: Vec<ConditionTag>,
    pub tolerance: f64,
}

impl KindSpec {
    pub fn new(conditions: Vec<ConditionTag>) -> Self {
        Self { conditions, tolerance: DEFAULT_KIND_TOL }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn basis() -> Self {
        Self::new(vec![
            ConditionTag::Projector,
            ConditionTag::PairwiseOrthogonal,
            ConditionTag::ResolutionOfIdentity,
            ConditionTag::UnitTrace,
        ])
    }

    pub fn pvm() -> Self {
        Self::new(vec![
            ConditionTag::PositiveSemidefinite,
            ConditionTag::ResolutionOfIdentity,
            ConditionTag::Projector,
            ConditionTag::PairwiseOrthogonal,
        ])
    }

    pub fn povm() -> Self {
        Self::new(vec![ConditionTag::PositiveSemidefinite, ConditionTag::ResolutionOfIdentity])
    }

    pub fn tps() -> Self {
        Self::new(vec![ConditionTag::MutualCommutation])
    }

    pub fn occupation() -> Self {
        Self::new(vec![
            ConditionTag::MutualCommutation,
            ConditionTag::PositiveSemidefinite,
            ConditionTag::Projector,
        ])
    }

    pub fn tag_names(&self) -> Vec<String> {
        self.conditions.iter().map(ToString::to_string).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub tag: ConditionTag,
    pub residual: f64,
    pub passed: bool,
}

/// Per-condition residuals of a kind check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub tolerance: f64,
    pub entries: Vec<ConditionEntry>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn residual(&self, tag: ConditionTag) -> Option<f64> {
        self.entries.iter().find(|e| e.tag == tag).map(|e| e.residual)
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.residual))
    }

    pub fn summary(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{}={:.3e}{}", e.tag, e.residual, if e.passed { "" } else { " FAIL" }))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// A tensor product structure representative: factor dimensions plus the
/// unitary identification of `⊗H_ε` with the full space.
#[derive(Clone, Debug, PartialEq)]
pub struct Tps {
    factor_dims: Vec<usize>,
    iso: UnitaryOp,
}

impl Tps {
    pub fn new(factor_dims: Vec<usize>, iso: UnitaryOp) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.iter().any(|&d| d < 2) {
            return Err(QsError::arg(format!("factor dims must each be >= 2, got {factor_dims:?}")));
        }
        let total: usize = factor_dims.iter().product();
        check_dims(total, iso.dim(), "factor product", "identification map")?;
        Ok(Self { factor_dims, iso })
    }

    /// The computational identification (identity map).
    pub fn computational(factor_dims: Vec<usize>) -> Result<Self> {
        let total = factor_dims.iter().product();
        Self::new(factor_dims, UnitaryOp::identity(total))
    }

    pub fn qubits(n: usize) -> Self {
        Self::computational(vec![2; n]).expect("qubit dims are valid")
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn factor_count(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.iso.dim()
    }

    pub fn iso(&self) -> &UnitaryOp {
        &self.iso
    }

    /// `iso†·m·iso`: an operator on `H` expressed on `⊗H_ε`.
    pub fn pull_back(&self, m: &CMatrix) -> CMatrix {
        self.iso.matrix().adjoint() * m * self.iso.matrix()
    }

    /// `iso·m·iso†`
    pub fn push_forward(&self, m: &CMatrix) -> CMatrix {
        self.iso.matrix() * m * self.iso.matrix().adjoint()
    }

    pub fn pull_back_ket(&self, psi: &Ket) -> Ket {
        psi.apply(&self.iso.adjoint()).expect("dims checked by caller")
    }

    /// The rival identification `u·iso`.
    pub fn conjugated(&self, u: &UnitaryOp) -> Result<Tps> {
        Ok(Tps { factor_dims: self.factor_dims.clone(), iso: u.compose(&self.iso)? })
    }

    /// `iso·(u_1 ⊗ … ⊗ u_n)`, an equivalent representative of the same TPS.
    pub fn locally_rotated(&self, local: &[UnitaryOp]) -> Result<Tps> {
        if local.len() != self.factor_dims.len() {
            return Err(QsError::arg("one local unitary per factor is required"));
        }
        for (u, &d) in local.iter().zip(&self.factor_dims) {
            check_dims(u.dim(), d, "local unitary", "factor")?;
        }
        let l = tensor_product(local)?;
        Ok(Tps { factor_dims: self.factor_dims.clone(), iso: self.iso.compose(&l)? })
    }

    /// Embeds a single-factor operator as `(⊗ I) ⊗ op` at position `factor`
    /// and pushes it through the identification map.
    pub fn embed(&self, factor: usize, op: &HermitianOp) -> Result<HermitianOp> {
        if factor >= self.factor_dims.len() {
            return Err(QsError::arg(format!("factor {factor} out of range")));
        }
        check_dims(op.dim(), self.factor_dims[factor], "operator", "factor")?;
        let ops: Vec<HermitianOp> = self
            .factor_dims
            .iter()
            .enumerate()
            .map(|(k, &d)| if k == factor { op.clone() } else { HermitianOp::identity(d) })
            .collect();
        let local = tensor_product(&ops)?;
        Ok(HermitianOp::symmetrized(self.push_forward(local.matrix())))
    }

    pub fn to_json(&self) -> Value {
        json!({"factor_dims": self.factor_dims, "iso": matrix_to_json(self.iso.matrix())})
    }
}

/// A labeled family of Hermitian operators of a given kind.
#[derive(Clone, Debug, PartialEq)]
pub struct KStructure {
    pub labels: Vec<String>,
    pub ops: Vec<HermitianOp>,
    pub kind: KindSpec,
    pub state_dependent: bool,
    /// Hash of the constructing state when `state_dependent`.
    pub state_hash: Option<u64>,
    /// Commutation group per operator; `MutualCommutation` only compares
    /// operators in distinct groups. `None` puts every operator in its own.
    pub groups: Option<Vec<usize>>,
    /// Tensor product structure the operators were built from, if any.
    pub frame: Option<Tps>,
    /// Session Hamiltonian, consulted by `DLocal`.
    pub hamiltonian: Option<HermitianOp>,
}

impl KStructure {
    pub fn new(labels: Vec<String>, ops: Vec<HermitianOp>, kind: KindSpec) -> Self {
        Self {
            labels,
            ops,
            kind,
            state_dependent: false,
            state_hash: None,
            groups: None,
            frame: None,
            hamiltonian: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.ops.first().map_or(0, HermitianOp::dim)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn with_hamiltonian(mut self, h: HermitianOp) -> Self {
        self.hamiltonian = Some(h);
        self
    }

    pub fn with_kind(mut self, kind: KindSpec) -> Self {
        self.kind = kind;
        self
    }

    /// Marks the structure as built from `psi`.
    pub fn mark_state_dependent(mut self, psi: &Ket) -> Self {
        self.state_dependent = true;
        self.state_hash = Some(state_hash(psi));
        self
    }

    /// Largest entrywise-Frobenius distance between corresponding operators.
    pub fn max_distance(&self, other: &KStructure) -> f64 {
        self.ops
            .iter()
            .zip(&other.ops)
            .map(|(a, b)| (a.matrix() - b.matrix()).norm())
            .fold(0.0, f64::max)
    }

    /// Unit vectors spanning each rank-1 operator, phase-fixed so the largest
    /// component is real and positive.
    pub fn basis_vectors(&self) -> Result<Vec<Ket>> {
        self.ops
            .iter()
            .map(|a| {
                let sd = spectral_decompose(a, DEFAULT_CLUSTER_TOL)?;
                let (top, vecs) = sd
                    .eigenvalues
                    .iter()
                    .zip(&sd.eigenvectors)
                    .next_back()
                    .ok_or_else(|| QsError::arg("empty operator"))?;
                if vecs.ncols() != 1 || (top - 1.0).abs() > 1e-8 {
                    return Err(QsError::arg("operator is not a rank-1 projector"));
                }
                let v = vecs.column(0).into_owned();
                let (imax, _) = v.iter().enumerate().fold((0, 0.0), |(bi, bn), (i, x)| {
                    if x.norm() > bn + 1e-12 { (i, x.norm()) } else { (bi, bn) }
                });
                let ph = v[imax].conj() / v[imax].norm();
                Ket::normalized(v * ph)
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "labels": self.labels,
            "kind": self.kind.tag_names(),
            "tolerance": self.kind.tolerance,
            "state_dependent": self.state_dependent,
            "operators": self.ops.iter().map(|a| matrix_to_json(a.matrix())).collect::<Vec<_>>(),
        })
    }
}

/// Row-major `[[re, im], …]` rows.
pub fn matrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

/// FNV-1a over the amplitude bit patterns.
pub fn state_hash(psi: &Ket) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for a in psi.amplitudes().iter() {
        for bits in [a.re.to_bits(), a.im.to_bits()] {
            for b in bits.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
    }
    h
}

fn hermitian_norm(m: &CMatrix) -> f64 {
    HermitianOp::symmetrized(m.clone()).op_norm()
}

fn condition_residual(s: &KStructure, tag: ConditionTag) -> f64 {
    let d = s.dim();
    match tag {
        ConditionTag::Projector => s
            .ops
            .iter()
            .map(|a| hermitian_norm(&(a.matrix() * a.matrix() - a.matrix())))
            .fold(0.0, f64::max),
        ConditionTag::PairwiseOrthogonal => {
            let mut worst: f64 = 0.0;
            for (i, a) in s.ops.iter().enumerate() {
                for b in &s.ops[i + 1..] {
                    worst = worst.max(spectral_norm(&(a.matrix() * b.matrix())));
                }
            }
            worst
        }
        ConditionTag::ResolutionOfIdentity => {
            let mut sum = CMatrix::zeros(d, d);
            for a in &s.ops {
                sum += a.matrix();
            }
            hermitian_norm(&(sum - CMatrix::identity(d, d)))
        }
        ConditionTag::PositiveSemidefinite => {
            s.ops.iter().map(|a| (-a.min_eigenvalue()).max(0.0)).fold(0.0, f64::max)
        }
        ConditionTag::UnitTrace => s.ops.iter().map(|a| (a.trace() - 1.0).abs()).fold(0.0, f64::max),
        ConditionTag::MutualCommutation => {
            let group = |i: usize| s.groups.as_ref().map_or(i, |g| g[i]);
            let mut worst: f64 = 0.0;
            for i in 0..s.ops.len() {
                for j in (i + 1)..s.ops.len() {
                    if group(i) != group(j) {
                        // i[A,B] is Hermitian
                        let c = commutator(s.ops[i].matrix(), s.ops[j].matrix()) * C64::i();
                        worst = worst.max(hermitian_norm(&c));
                    }
                }
            }
            worst
        }
        ConditionTag::DLocal(max_weight) => match (&s.frame, &s.hamiltonian) {
            (Some(tps), Some(h)) => match pauli_expand(h, tps) {
                Ok(exp) => exp
                    .terms
                    .iter()
                    .filter(|t| t.weight() > max_weight)
                    .map(|t| t.coefficient.norm_sqr())
                    .sum::<f64>()
                    .sqrt(),
                Err(_) => f64::INFINITY,
            },
            _ => f64::INFINITY,
        },
    }
}

/// Evaluates every condition of the structure's kind.
pub fn check_kind(s: &KStructure) -> ConditionReport {
    let tol = s.kind.tolerance;
    let entries = s
        .kind
        .conditions
        .iter()
        .map(|&tag| {
            let residual = if s.ops.is_empty() { f64::INFINITY } else { condition_residual(s, tag) };
            ConditionEntry { tag, residual, passed: residual < tol }
        })
        .collect();
    ConditionReport { tolerance: tol, entries }
}

/// `u·A·u†` on every operator, the frame and the attached Hamiltonian.
///
/// Fails with an internal error if the result no longer satisfies a kind the
/// input satisfied; for the built-in conditions that cannot happen.
pub fn transform_structure(s: &KStructure, u: &UnitaryOp) -> Result<KStructure> {
    let conj = |a: &HermitianOp| -> Result<HermitianOp> { crate::hilbert::conjugate(a, u) };
    let out = KStructure {
        labels: s.labels.clone(),
        ops: s.ops.iter().map(conj).collect::<Result<_>>()?,
        kind: s.kind.clone(),
        state_dependent: s.state_dependent,
        state_hash: s.state_hash,
        groups: s.groups.clone(),
        frame: s.frame.as_ref().map(|t| t.conjugated(u)).transpose()?,
        hamiltonian: s.hamiltonian.as_ref().map(conj).transpose()?,
    };
    if check_kind(s).passed() {
        let after = check_kind(&out);
        if !after.passed() {
            return Err(QsError::Internal(format!(
                "conjugation broke an invariant kind: {}",
                after.summary()
            )));
        }
    }
    Ok(out)
}

/// Rank-1 projectors onto an orthonormal basis.
pub fn make_basis_structure(vectors: &[Ket]) -> Result<KStructure> {
    let d = vectors.first().ok_or_else(|| QsError::arg("empty basis"))?.dim();
    if vectors.len() != d {
        return Err(QsError::arg(format!("basis of dim {d} needs {d} vectors, got {}", vectors.len())));
    }
    for (i, a) in vectors.iter().enumerate() {
        check_dims(a.dim(), d, "basis vector", "basis")?;
        for (j, b) in vectors.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            if (a.inner(b) - C64::from(expected)).norm() > 1e-10 {
                return Err(QsError::arg(format!("basis vectors {i} and {j} are not orthonormal")));
            }
        }
    }
    let labels = (0..d).map(|i| format!("b{i}")).collect();
    let ops = vectors.iter().map(Ket::projector).collect();
    Ok(KStructure::new(labels, ops, KindSpec::basis()))
}

pub fn computational_basis_structure(dim: usize) -> KStructure {
    let vecs: Vec<Ket> = (0..dim).map(|i| Ket::basis(dim, i)).collect();
    make_basis_structure(&vecs).expect("computational basis is orthonormal")
}

/// A positive operator-valued measure; rejected with the full report if any
/// defining condition fails.
pub fn make_povm_structure(effects: &[HermitianOp]) -> Result<KStructure> {
    build_checked(effects, KindSpec::povm(), "e")
}

/// A projection-valued measure: the POVM conditions plus idempotence and
/// pairwise orthogonality.
pub fn make_pvm_structure(projectors: &[HermitianOp]) -> Result<KStructure> {
    build_checked(projectors, KindSpec::pvm(), "p")
}

fn build_checked(ops: &[HermitianOp], kind: KindSpec, prefix: &str) -> Result<KStructure> {
    let d = ops.first().ok_or_else(|| QsError::arg("empty operator family"))?.dim();
    for a in ops {
        check_dims(a.dim(), d, "operator", "family")?;
    }
    let labels = (0..ops.len()).map(|i| format!("{prefix}{i}")).collect();
    let s = KStructure::new(labels, ops.to_vec(), kind);
    let report = check_kind(&s);
    if !report.passed() {
        return Err(QsError::KindViolation(Box::new(report)));
    }
    Ok(s)
}

/// `ops_per_factor` seeded random Hermitian operators per factor, embedded
/// as `(⊗ I) ⊗ α_ε` and pushed through the identification map.
pub fn make_tps_structure(tps: &Tps, ops_per_factor: usize, seed: u64) -> Result<KStructure> {
    if ops_per_factor == 0 {
        return Err(QsError::arg("ops_per_factor must be at least 1"));
    }
    let mut r = rng(seed);
    let mut labels = Vec::new();
    let mut ops = Vec::new();
    let mut groups = Vec::new();
    for (f, &d) in tps.factor_dims().iter().enumerate() {
        for j in 0..ops_per_factor {
            let local = gaussian_hermitian(d, &mut r);
            ops.push(tps.embed(f, &local)?);
            labels.push(format!("f{f}.{j}"));
            groups.push(f);
        }
    }
    let mut s = KStructure::new(labels, ops, KindSpec::tps());
    s.groups = Some(groups);
    s.frame = Some(tps.clone());
    Ok(s)
}

/// Hard-core occupation numbers `n̂_x = (I − σz_x)/2`, one per qubit factor.
pub fn occupation_structure(tps: &Tps) -> Result<KStructure> {
    if tps.factor_dims().iter().any(|&d| d != 2) {
        return Err(QsError::arg("occupation structure needs qubit factors"));
    }
    let n_local = HermitianOp::from_real_diagonal(&[0.0, 1.0]);
    let ops = (0..tps.factor_count()).map(|x| tps.embed(x, &n_local)).collect::<Result<Vec<_>>>()?;
    let labels = (0..ops.len()).map(|x| format!("n{x}")).collect();
    let mut s = KStructure::new(labels, ops, KindSpec::occupation());
    s.frame = Some(tps.clone());
    Ok(s)
}

/// Standing invariant vector for comparing tensor product structures:
/// sorted reduced spectra per factor and reference state, then the sorted
/// per-support-set interaction weights of `h`.
pub fn canonical_tps_invariants(tps: &Tps, reference_states: &[Ket], h: &HermitianOp) -> Result<Vec<f64>> {
    check_dims(h.dim(), tps.total_dim(), "hamiltonian", "tps")?;
    let mut out = Vec::new();
    for f in 0..tps.factor_count() {
        for psi in reference_states {
            out.extend(reduced_state(psi, tps, &[f])?.eigenvalues());
        }
    }
    let exp = pauli_expand(h, tps)?;
    let weights = exp.support_weights();
    let n = tps.factor_count();
    let mut profile: Vec<f64> = (1..(1usize << n)).map(|mask| weights.get(&mask).copied().unwrap_or(0.0)).collect();
    profile.sort_by(f64::total_cmp);
    out.extend(profile);
    Ok(out)
}

/// Outcome of the one-sided TPS comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TpsComparison {
    /// Invariants differ, so no local unitary and permutation relates them.
    InvariantDistinct,
    /// Invariants agree; equivalence is not decided.
    InvariantEqualInconclusive,
}

pub fn compare_tps(a: &Tps, b: &Tps, reference_states: &[Ket], h: &HermitianOp, tol: f64) -> Result<TpsComparison> {
    let ia = canonical_tps_invariants(a, reference_states, h)?;
    let ib = canonical_tps_invariants(b, reference_states, h)?;
    if ia.len() != ib.len() {
        return Ok(TpsComparison::InvariantDistinct);
    }
    let gap = ia.iter().zip(&ib).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(if gap > tol { TpsComparison::InvariantDistinct } else { TpsComparison::InvariantEqualInconclusive })
}
