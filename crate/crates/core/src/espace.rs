//! Emergent-space machinery: product-operator expansion relative to a tensor
//! product structure, d-locality, interaction graphs, entropies, mutual
//! information distances and discretized coherent-state families.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::f64::consts::PI;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{QsError, Result};
use crate::hilbert::{
    check_dims, partial_trace_raw, strides, CMatrix, CVector, HermitianOp, Ket, UnitaryOp, C64, ZERO,
};
use crate::kstruct::{ConditionTag, KStructure, KindSpec, Tps};

pub const DEFAULT_COEFF_FLOOR: f64 = 1e-10;
pub const DEFAULT_MI_FLOOR: f64 = 1e-8;

/// Coefficients smaller than this are dropped from the stored term list.
const STORE_FLOOR: f64 = 1e-14;

/// Trace-orthonormal Hermitian basis of a `d`-dimensional factor: the
/// identity first, then generalized Gell-Mann matrices (symmetric and
/// antisymmetric pairs, then diagonals). For `d = 2` this is `I, X, Y, Z`
/// up to the `1/√2` normalization.
pub fn factor_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d);
    out.push(CMatrix::identity(d, d) / C64::from((d as f64).sqrt()));
    let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = CMatrix::zeros(d, d);
            sym[(j, k)] = s;
            sym[(k, j)] = s;
            out.push(sym);
            let mut anti = CMatrix::zeros(d, d);
            anti[(j, k)] = -s * C64::i();
            anti[(k, j)] = s * C64::i();
            out.push(anti);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = CMatrix::zeros(d, d);
        for j in 0..l {
            diag[(j, j)] = C64::from(norm);
        }
        diag[(l, l)] = C64::from(-(l as f64) * norm);
        out.push(diag);
    }
    out
}

/// Human-readable name of basis element `idx` of a `d`-dimensional factor.
pub fn basis_label(d: usize, idx: usize) -> String {
    if d == 2 {
        return ["I", "X", "Y", "Z"][idx].to_string();
    }
    if idx == 0 {
        return "I".to_string();
    }
    let pairs = d * (d - 1) / 2;
    if idx <= 2 * pairs {
        let p = (idx - 1) / 2;
        let (mut j, mut rem) = (0, p);
        while rem >= d - j - 1 {
            rem -= d - j - 1;
            j += 1;
        }
        let k = j + 1 + rem;
        let kind = if (idx - 1).is_multiple_of(2) { "S" } else { "A" };
        format!("{kind}{j}{k}")
    } else {
        format!("D{}", idx - 2 * pairs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductTerm {
    pub coefficient: C64,
    /// Basis index per factor; 0 is the identity.
    pub factors: Vec<usize>,
}

impl ProductTerm {
    pub fn weight(&self) -> usize {
        self.factors.iter().filter(|&&f| f != 0).count()
    }

    pub fn support(&self) -> Vec<usize> {
        self.factors.iter().enumerate().filter(|(_, &f)| f != 0).map(|(k, _)| k).collect()
    }

    pub fn label(&self, dims: &[usize]) -> String {
        self.factors.iter().zip(dims).map(|(&f, &d)| basis_label(d, f)).collect::<Vec<_>>().join("⊗")
    }
}

/// Expansion of an operator over tensor products of per-factor bases.
#[derive(Clone, Debug)]
pub struct ProductExpansion {
    pub terms: Vec<ProductTerm>,
    pub tps: Tps,
}

impl ProductExpansion {
    /// `Σ c·(B_1 ⊗ … ⊗ B_n)` pushed forward through the identification map.
    pub fn reconstruct(&self) -> CMatrix {
        let dims = self.tps.factor_dims();
        let radices: Vec<usize> = dims.iter().map(|d| d * d).collect();
        let mut coeffs = vec![ZERO; radices.iter().product()];
        let st = strides(&radices);
        for t in &self.terms {
            let idx: usize = t.factors.iter().zip(&st).map(|(f, s)| f * s).sum();
            coeffs[idx] = t.coefficient;
        }
        let bases: Vec<Vec<CMatrix>> = dims.iter().map(|&d| factor_basis(d)).collect();
        for (k, &d) in dims.iter().enumerate() {
            // (i,j) <- a : B_a[i][j]
            let m = CMatrix::from_fn(d * d, d * d, |row, a| bases[k][a][(row / d, row % d)]);
            mode_product(&mut coeffs, &radices, k, &m);
        }
        let pulled = pairs_to_matrix(&coeffs, dims);
        self.tps.push_forward(&pulled)
    }

    pub fn locality_degree(&self, coeff_floor: f64) -> usize {
        self.terms
            .iter()
            .filter(|t| t.coefficient.norm() > coeff_floor)
            .map(ProductTerm::weight)
            .max()
            .unwrap_or(0)
    }

    /// Total squared weight per exact support set (bitmask over factors).
    pub fn support_weights(&self) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for t in &self.terms {
            let mask = t.support().iter().fold(0usize, |m, &k| m | (1 << k));
            *out.entry(mask).or_insert(0.0) += t.coefficient.norm_sqr();
        }
        out
    }
}

fn matrix_to_pairs(m: &CMatrix, dims: &[usize]) -> Vec<C64> {
    let n = dims.len();
    let st = strides(dims);
    let radices: Vec<usize> = dims.iter().map(|d| d * d).collect();
    let rst = strides(&radices);
    let total = m.nrows();
    let mut out = vec![ZERO; total * total];
    for i in 0..total {
        for j in 0..total {
            let mut idx = 0;
            for k in 0..n {
                let ik = (i / st[k]) % dims[k];
                let jk = (j / st[k]) % dims[k];
                idx += (ik * dims[k] + jk) * rst[k];
            }
            out[idx] = m[(i, j)];
        }
    }
    out
}

fn pairs_to_matrix(t: &[C64], dims: &[usize]) -> CMatrix {
    let n = dims.len();
    let st = strides(dims);
    let radices: Vec<usize> = dims.iter().map(|d| d * d).collect();
    let rst = strides(&radices);
    let total: usize = dims.iter().product();
    CMatrix::from_fn(total, total, |i, j| {
        let mut idx = 0;
        for k in 0..n {
            let ik = (i / st[k]) % dims[k];
            let jk = (j / st[k]) % dims[k];
            idx += (ik * dims[k] + jk) * rst[k];
        }
        t[idx]
    })
}

/// In-place `T ← M ×_k T` on a mixed-radix tensor.
fn mode_product(t: &mut [C64], radices: &[usize], k: usize, m: &CMatrix) {
    let r = radices[k];
    let inner: usize = radices[k + 1..].iter().product();
    let outer: usize = radices[..k].iter().product();
    let mut buf = vec![ZERO; r];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * r * inner + i;
            for (q, b) in buf.iter_mut().enumerate() {
                *b = t[base + q * inner];
            }
            for a in 0..r {
                let mut acc = ZERO;
                for q in 0..r {
                    acc += m[(a, q)] * buf[q];
                }
                t[base + a * inner] = acc;
            }
        }
    }
}

/// Expands `h` (pulled back through `tps`) over products of trace-orthonormal
/// per-factor Hermitian bases. Coefficients are `tr(B h)`.
pub fn pauli_expand(h: &HermitianOp, tps: &Tps) -> Result<ProductExpansion> {
    check_dims(h.dim(), tps.total_dim(), "operator", "tps")?;
    let dims = tps.factor_dims();
    let pulled = tps.pull_back(h.matrix());
    let radices: Vec<usize> = dims.iter().map(|d| d * d).collect();
    let mut coeffs = matrix_to_pairs(&pulled, dims);
    for (k, &d) in dims.iter().enumerate() {
        let basis = factor_basis(d);
        // a <- (i,j) : B_a[j][i]
        let m = CMatrix::from_fn(d * d, d * d, |a, col| basis[a][(col % d, col / d)]);
        mode_product(&mut coeffs, &radices, k, &m);
    }
    let st = strides(&radices);
    let terms = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > STORE_FLOOR)
        .map(|(idx, &c)| ProductTerm {
            coefficient: c,
            factors: st.iter().zip(&radices).map(|(s, r)| (idx / s) % r).collect(),
        })
        .collect();
    Ok(ProductExpansion { terms, tps: tps.clone() })
}

/// Largest number of non-identity factors over above-floor expansion terms.
pub fn locality_degree(h: &HermitianOp, tps: &Tps, coeff_floor: f64) -> Result<usize> {
    Ok(pauli_expand(h, tps)?.locality_degree(coeff_floor))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Factors as vertices, interaction edges, and optionally the mutual
/// information and distance matrices of a state.
#[derive(Clone, Debug)]
pub struct SpaceGraph {
    pub vertices: Vec<String>,
    pub edges: Vec<Edge>,
    pub mi_matrix: Vec<Vec<f64>>,
    /// `+∞` marks pairs below the mutual-information floor.
    pub dist_matrix: Vec<Vec<f64>>,
    pub i_max: f64,
    pub mi_floor: f64,
}

impl SpaceGraph {
    pub fn edge_set(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.a, e.b)).collect()
    }

    /// Larger mutual information never maps to a larger distance.
    pub fn is_distance_monotone(&self) -> bool {
        let n = self.mi_matrix.len();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((self.mi_matrix[i][j], self.dist_matrix[i][j]));
            }
        }
        pairs.iter().all(|&(mi_a, d_a)| pairs.iter().all(|&(mi_b, d_b)| !(mi_a > mi_b && d_a > d_b)))
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph space {\n");
        for (k, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "  {k} [label=\"{v}\"];");
        }
        for e in &self.edges {
            let _ = writeln!(s, "  {} -- {} [label=\"{:.6e}\", weight={:.6e}];", e.a, e.b, e.weight, e.weight);
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> Value {
        let finite_or_null = |m: &Vec<Vec<f64>>| -> Value {
            Value::Array(
                m.iter()
                    .map(|row| Value::Array(row.iter().map(|&x| if x.is_finite() { json!(x) } else { Value::Null }).collect()))
                    .collect(),
            )
        };
        json!({
            "vertices": self.vertices,
            "edges": self.edges.iter().map(|e| json!({"a": e.a, "b": e.b, "weight": e.weight})).collect::<Vec<_>>(),
            "mi_matrix": self.mi_matrix,
            "dist_matrix": finite_or_null(&self.dist_matrix),
            "i_max": self.i_max,
            "mi_floor": self.mi_floor,
        })
    }
}

/// Edges between factors that share an above-floor expansion term; the edge
/// weight is the summed squared coefficient of those terms.
pub fn interaction_graph(h: &HermitianOp, tps: &Tps, coeff_floor: f64) -> Result<SpaceGraph> {
    let exp = pauli_expand(h, tps)?;
    let n = tps.factor_dims().len();
    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for t in exp.terms.iter().filter(|t| t.coefficient.norm() > coeff_floor) {
        let sup = t.support();
        for (x, &a) in sup.iter().enumerate() {
            for &b in &sup[x + 1..] {
                *weights.entry((a, b)).or_insert(0.0) += t.coefficient.norm_sqr();
            }
        }
    }
    Ok(SpaceGraph {
        vertices: (0..n).map(|k| k.to_string()).collect(),
        edges: weights.into_iter().map(|((a, b), weight)| Edge { a, b, weight }).collect(),
        mi_matrix: Vec::new(),
        dist_matrix: Vec::new(),
        i_max: 0.0,
        mi_floor: DEFAULT_MI_FLOOR,
    })
}

/// Von Neumann entropy in nats.
pub fn vn_entropy(rho: &HermitianOp) -> Result<f64> {
    let ev = rho.eigenvalues();
    if let Some(&min) = ev.first() {
        if min < -1e-9 {
            return Err(QsError::arg(format!("density operator has negative eigenvalue {min:.3e}")));
        }
    }
    let tr: f64 = ev.iter().sum();
    if (tr - 1.0).abs() > 1e-9 {
        return Err(QsError::arg(format!("density operator trace {tr} is not 1")));
    }
    Ok(entropy_of_spectrum(&ev))
}

pub(crate) fn entropy_of_spectrum(ev: &[f64]) -> f64 {
    ev.iter().filter(|&&l| l > 1e-12).map(|&l| -l * l.ln()).sum()
}

/// Reduced density matrix of a pure state on `region`, computed from the
/// amplitudes directly.
pub fn reduced_state(psi: &Ket, tps: &Tps, region: &[usize]) -> Result<HermitianOp> {
    check_dims(psi.dim(), tps.total_dim(), "ket", "tps")?;
    let pulled = tps.pull_back_ket(psi);
    let v = pulled.amplitudes();
    let rho = v * v.adjoint();
    Ok(HermitianOp::symmetrized(partial_trace_raw(&rho, tps.factor_dims(), region)?))
}

fn region_entropy(psi: &Ket, tps: &Tps, region: &[usize]) -> Result<f64> {
    Ok(entropy_of_spectrum(&reduced_state(psi, tps, region)?.eigenvalues()))
}

/// `I(R:R′) = S_R + S_R′ − S_RR′` for a pure state.
pub fn mutual_information(psi: &Ket, tps: &Tps, r1: &[usize], r2: &[usize]) -> Result<f64> {
    if r1.is_empty() || r2.is_empty() {
        return Err(QsError::arg("mutual information regions must be non-empty"));
    }
    if r1.iter().any(|x| r2.contains(x)) {
        return Err(QsError::arg("mutual information regions overlap"));
    }
    let mut joint: Vec<usize> = r1.iter().chain(r2).copied().collect();
    joint.sort_unstable();
    Ok(region_entropy(psi, tps, r1)? + region_entropy(psi, tps, r2)? - region_entropy(psi, tps, &joint)?)
}

/// Interaction topology plus pairwise single-factor mutual information of
/// `psi`, with distances `−ln(I/I_max)` (global `I_max`) and `+∞` below
/// `mi_floor`.
pub fn space_graph(h: &HermitianOp, tps: &Tps, psi: &Ket, mi_floor: f64) -> Result<SpaceGraph> {
    let mut g = interaction_graph(h, tps, DEFAULT_COEFF_FLOOR)?;
    let n = tps.factor_dims().len();
    let single: Vec<f64> = (0..n).map(|k| region_entropy(psi, tps, &[k])).collect::<Result<_>>()?;
    let mut mi = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let val = single[a] + single[b] - region_entropy(psi, tps, &[a, b])?;
            mi[a][b] = val;
            mi[b][a] = val;
        }
    }
    let i_max = mi.iter().flatten().fold(0.0f64, |m, &x| m.max(x));
    let dist = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    if a == b {
                        0.0
                    } else if mi[a][b] > mi_floor {
                        0.0 - (mi[a][b] / i_max).ln()
                    } else {
                        f64::INFINITY
                    }
                })
                .collect()
        })
        .collect();
    g.mi_matrix = mi;
    g.dist_matrix = dist;
    g.i_max = i_max;
    g.mi_floor = mi_floor;
    Ok(g)
}

/// Discretized squeezed coherent states on a ring of `sites` positions.
///
/// Members are indexed by `(q, k)` with `q` the peak site and `p = 2πħk/L`
/// the momentum. Amplitudes are `e^{(i/ħ)p(x − q/2)}·e^{−δ(x,q)²/(2ħ)}` with
/// `δ` the minimal-image separation, then renormalized.
#[derive(Clone, Debug)]
pub struct CoherentFamily {
    pub sites: usize,
    pub hbar: f64,
    pub members: Vec<Ket>,
}

impl CoherentFamily {
    pub fn index(&self, q: usize, k: usize) -> usize {
        q * self.sites + k
    }

    pub fn momentum(&self, k: usize) -> f64 {
        2.0 * PI * self.hbar * k as f64 / self.sites as f64
    }

    pub fn dim(&self) -> usize {
        self.members.first().map_or(0, Ket::dim)
    }

    /// `(d/L²)·Σ |q,p⟩⟨q,p|`
    pub fn frame_operator(&self) -> HermitianOp {
        let d = self.dim();
        let mut f = CMatrix::zeros(d, d);
        for m in &self.members {
            let v = m.amplitudes();
            f += v * v.adjoint();
        }
        let scale = d as f64 / self.members.len() as f64;
        HermitianOp::symmetrized(f * C64::from(scale))
    }

    /// `(c, ‖F − c·I‖)` with `c` the mean diagonal of the scaled frame
    /// operator and the residual in operator norm.
    pub fn frame_residual(&self) -> (f64, f64) {
        let f = self.frame_operator();
        let d = f.dim();
        let c = f.trace() / d as f64;
        let res = f.sub(&HermitianOp::identity(d).scale(c)).expect("same dim").op_norm();
        (c, res)
    }

    /// The family as a POVM: effects `(d/(L²c))·|q,p⟩⟨q,p|`.
    pub fn povm_structure(&self) -> KStructure {
        let (c, _) = self.frame_residual();
        let scale = self.dim() as f64 / (self.members.len() as f64 * c);
        let mut labels = Vec::with_capacity(self.members.len());
        let mut ops = Vec::with_capacity(self.members.len());
        for q in 0..self.sites {
            for k in 0..self.sites {
                labels.push(format!("q{q}p{k}"));
                ops.push(self.members[self.index(q, k)].projector().scale(scale));
            }
        }
        KStructure::new(
            labels,
            ops,
            KindSpec::new(vec![ConditionTag::PositiveSemidefinite, ConditionTag::ResolutionOfIdentity]),
        )
    }

    /// `⟨q,p|A_x|q,p⟩` for every member and every operator of `s`.
    pub fn expectation_profile(&self, s: &KStructure) -> Vec<Vec<f64>> {
        self.members.iter().map(|m| s.ops.iter().map(|a| m.expectation(a)).collect()).collect()
    }

    /// Gram table `|⟨q,p|q′,p′⟩|`.
    pub fn overlap_table(&self) -> Vec<Vec<f64>> {
        self.members.iter().map(|a| self.members.iter().map(|b| a.inner(b).norm()).collect()).collect()
    }
}

fn ring_displacement(x: usize, q: usize, sites: usize) -> f64 {
    let l = sites as i64;
    let mut d = (x as i64 - q as i64).rem_euclid(l);
    if d > l / 2 {
        d -= l;
    }
    d as f64
}

pub fn coherent_family(sites: usize, hbar: f64) -> Result<CoherentFamily> {
    if sites < 4 {
        return Err(QsError::arg("coherent family needs at least 4 sites"));
    }
    if hbar <= 0.0 {
        return Err(QsError::arg("hbar must be positive"));
    }
    let mut members = Vec::with_capacity(sites * sites);
    for q in 0..sites {
        for k in 0..sites {
            let p = 2.0 * PI * hbar * k as f64 / sites as f64;
            let v = CVector::from_fn(sites, |x, _| {
                let delta = ring_displacement(x, q, sites);
                let envelope = (-delta * delta / (2.0 * hbar)).exp();
                C64::from_polar(envelope, p * (x as f64 - q as f64 / 2.0) / hbar)
            });
            members.push(Ket::normalized(v)?);
        }
    }
    Ok(CoherentFamily { sites, hbar, members })
}

/// Applies `witness` to every member.
pub fn rival_coherent_family(family: &CoherentFamily, witness: &UnitaryOp) -> Result<CoherentFamily> {
    let members = family.members.iter().map(|m| m.apply(witness)).collect::<Result<_>>()?;
    Ok(CoherentFamily { sites: family.sites, hbar: family.hbar, members })
}

