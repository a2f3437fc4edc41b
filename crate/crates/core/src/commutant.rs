//! Operators commuting with a Hamiltonian.
//!
//! The commutant of `H` is block-diagonal over its eigenspaces, so its real
//! dimension is `Σ m_i²`. Unitaries sampled from it are the witnesses used to
//! build rival structures. The time-evolution orbit `t ↦ e^{−iHt}` is one
//! one-parameter subgroup among many; the scans here measure how far a given
//! commutant unitary sits from that orbit.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{QsError, Result};
use crate::hilbert::{
    commutator, evolve, spectral_decompose, CMatrix, HermitianOp, Propagator, SpectralDecomp, UnitaryOp, C64, ZERO,
};
use crate::sampling::rng;

/// Exclusion grid: `EXCLUSION_STEPS` points spanning `[−EXCLUSION_T_MAX, EXCLUSION_T_MAX]`.
pub const EXCLUSION_T_MAX: f64 = 100.0;
pub const EXCLUSION_STEPS: usize = 100_001;
pub const EXCLUSION_THRESHOLD: f64 = 1e-3;
const MAX_RESAMPLES: usize = 64;

/// Hermitian generators spanning the real vector space of operators that
/// commute with the source Hamiltonian.
#[derive(Clone, Debug)]
pub struct CommutantBasis {
    pub dim_total: usize,
    pub generators: Vec<HermitianOp>,
    pub source_spectrum: SpectralDecomp,
    source: HermitianOp,
}

impl CommutantBasis {
    pub fn source(&self) -> &HermitianOp {
        &self.source
    }

    /// Whether unitaries off the (phase-modded) time orbit exist at all.
    /// With one distinct eigenvalue the orbit is the global phase circle;
    /// otherwise time and phase sweep at most a 2-torus.
    pub fn has_off_orbit_directions(&self) -> bool {
        if self.source_spectrum.eigenvalues.len() == 1 {
            self.dim_total > 1
        } else {
            self.dim_total > 2
        }
    }
}

/// Eigenspace-wise construction: for each clustered eigenspace of dimension
/// `m` with orthonormal basis `v_a`, the `m²` generators `v_a v_a†`,
/// `(v_a v_b† + v_b v_a†)/√2` and `i(v_a v_b† − v_b v_a†)/√2`.
pub fn commutant_basis(h: &HermitianOp, cluster_tol: f64) -> Result<CommutantBasis> {
    let sd = spectral_decompose(h, cluster_tol)?;
    let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let mut generators = Vec::new();
    for vecs in &sd.eigenvectors {
        let m = vecs.ncols();
        for a in 0..m {
            let va = vecs.column(a);
            generators.push(HermitianOp::symmetrized(va * va.adjoint()));
            for b in (a + 1)..m {
                let vb = vecs.column(b);
                let ab = va * vb.adjoint();
                let ba = vb * va.adjoint();
                generators.push(HermitianOp::symmetrized((&ab + &ba) * s));
                generators.push(HermitianOp::symmetrized((ab - ba) * (s * C64::i())));
            }
        }
    }
    let dim_total = sd.multiplicities.iter().map(|m| m * m).sum();
    debug_assert_eq!(dim_total, generators.len());
    Ok(CommutantBasis { dim_total, generators, source_spectrum: sd, source: h.clone() })
}

/// Result of drawing a commutant unitary.
#[derive(Clone, Debug)]
pub enum CommutantSample {
    Sampled {
        unitary: UnitaryOp,
        /// Distance to the exclusion grid when exclusion was requested.
        orbit_distance: Option<f64>,
        attempts: usize,
    },
    /// Off-orbit exclusion was requested but cannot be satisfied.
    NotAvailable { reason: String },
}

impl CommutantSample {
    pub fn unitary(&self) -> Option<&UnitaryOp> {
        match self {
            CommutantSample::Sampled { unitary, .. } => Some(unitary),
            CommutantSample::NotAvailable { .. } => None,
        }
    }
}

/// `exp(−i·G)` with `G` a seeded standard-normal combination of the basis
/// generators. With `exclude_time_orbit`, candidates within
/// [`EXCLUSION_THRESHOLD`] of the time-orbit grid are resampled.
pub fn sample_commutant_unitary(cb: &CommutantBasis, seed: u64, exclude_time_orbit: bool) -> CommutantSample {
    if exclude_time_orbit && !cb.has_off_orbit_directions() {
        return CommutantSample::NotAvailable {
            reason: format!(
                "commutant of dimension {} is covered by time evolution and global phase",
                cb.dim_total
            ),
        };
    }
    let mut r = rng(seed);
    let scanner = OrbitScanner::new(&cb.source);
    for attempt in 1..=MAX_RESAMPLES {
        let u = draw(cb, &mut r);
        if !exclude_time_orbit {
            return CommutantSample::Sampled { unitary: u, orbit_distance: None, attempts: attempt };
        }
        let (_, dist) = scanner.grid_min(&u, EXCLUSION_T_MAX, EXCLUSION_STEPS);
        if dist > EXCLUSION_THRESHOLD {
            return CommutantSample::Sampled { unitary: u, orbit_distance: Some(dist), attempts: attempt };
        }
    }
    CommutantSample::NotAvailable { reason: format!("no off-orbit sample in {MAX_RESAMPLES} attempts") }
}

fn draw(cb: &CommutantBasis, r: &mut impl Rng) -> UnitaryOp {
    let d = cb.source.dim();
    let mut g = CMatrix::zeros(d, d);
    for gen in &cb.generators {
        let c: f64 = r.sample(StandardNormal);
        g += gen.matrix() * C64::from(c);
    }
    evolve(&HermitianOp::symmetrized(g), 1.0, 1.0)
}

/// `Û_{t,t0} = exp(−i·h·(t − t0)/ħ)`
pub fn time_evolution(h: &HermitianOp, t: f64, t0: f64, hbar: f64) -> UnitaryOp {
    evolve(h, t - t0, hbar)
}

/// Phase-invariant distance of a target to `{e^{−iht}}` evaluated cheaply in
/// the eigenbasis of `h` (ħ = 1).
pub struct OrbitScanner {
    prop: Propagator,
}

impl OrbitScanner {
    pub fn new(h: &HermitianOp) -> Self {
        Self { prop: Propagator::new(h) }
    }

    /// `w_k = (V† S† V)_{kk}` so that `tr(S† U(t)) = Σ_k w_k e^{−iλ_k t}`.
    fn weights(&self, target: &UnitaryOp) -> Vec<C64> {
        let v = self.prop.eigenvectors();
        let m = v.adjoint() * target.matrix().adjoint() * v;
        (0..m.nrows()).map(|k| m[(k, k)]).collect()
    }

    fn overlap(&self, w: &[C64], t: f64) -> C64 {
        w.iter().zip(self.prop.eigenvalues()).map(|(wk, lam)| wk * C64::from_polar(1.0, -lam * t)).sum()
    }

    /// Squared distance from the overlap; adequate for grid comparisons.
    fn dist_from_overlap(&self, ov: C64) -> f64 {
        let d = self.prop.eigenvalues().len() as f64;
        (2.0 * d - 2.0 * ov.norm()).max(0.0).sqrt()
    }

    /// Grid minimum over `steps` uniform points on `[−t_max, t_max]`. Ties
    /// resolve to the lowest grid index, so the result is deterministic.
    pub fn grid_min(&self, target: &UnitaryOp, t_max: f64, steps: usize) -> (f64, f64) {
        let w = self.weights(target);
        let steps = steps.max(1);
        let t_of = |k: usize| {
            if steps == 1 {
                0.0
            } else {
                -t_max + 2.0 * t_max * k as f64 / (steps - 1) as f64
            }
        };
        const CHUNK: usize = 1 << 14;
        let best = (0..steps.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(steps);
                let mut best = (f64::NEG_INFINITY, lo);
                for k in lo..hi {
                    let ov = self.overlap(&w, t_of(k)).norm();
                    if ov > best.0 {
                        best = (ov, k);
                    }
                }
                best
            })
            .reduce(|| (f64::NEG_INFINITY, usize::MAX), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
        let t = t_of(best.1);
        (t, self.dist_from_overlap(self.overlap(&w, t)))
    }

    /// Newton refinement of `|tr(S†U(t))|²` around `t0`, confined to
    /// `[t0 − radius, t0 + radius]`.
    fn refine(&self, w: &[C64], t0: f64, radius: f64) -> f64 {
        let lams = self.prop.eigenvalues();
        let mut t = t0;
        for _ in 0..50 {
            let (mut a, mut a1, mut a2) = (ZERO, ZERO, ZERO);
            for (wk, &lam) in w.iter().zip(lams) {
                let e = wk * C64::from_polar(1.0, -lam * t);
                a += e;
                a1 += e * C64::new(0.0, -lam);
                a2 += e * C64::from(-lam * lam);
            }
            let g1 = 2.0 * (a.conj() * a1).re;
            let g2 = 2.0 * (a1.conj() * a1 + a.conj() * a2).re;
            if g2 >= 0.0 {
                break;
            }
            let next = (t - g1 / g2).clamp(t0 - radius, t0 + radius);
            if (next - t).abs() <= 1e-15 * t.abs().max(1.0) {
                t = next;
                break;
            }
            t = next;
        }
        t
    }
}

/// Best time-orbit approximation of a commutant unitary over a uniform grid
/// on `[−t_max, t_max]`, refined locally, with the final distance
/// `min_φ ‖e^{iφ}·evolve(h,t) − target‖_F` computed on the full matrices.
pub fn orbit_approximation(h: &HermitianOp, target: &UnitaryOp, t_max: f64, steps: usize) -> Result<(f64, f64)> {
    if target.dim() != h.dim() {
        return Err(QsError::arg("target and hamiltonian dimensions differ"));
    }
    let c = commutator(target.matrix(), h.matrix()).norm();
    if c > 1e-8 {
        return Err(QsError::arg(format!("target does not commute with h (‖[S,H]‖ = {c:.3e})")));
    }
    let scanner = OrbitScanner::new(h);
    let (t_grid, _) = scanner.grid_min(target, t_max, steps);
    let spacing = if steps > 1 { 2.0 * t_max / (steps - 1) as f64 } else { t_max };
    let w = scanner.weights(target);
    let t_ref = scanner.refine(&w, t_grid, spacing);

    let direct = |t: f64| scanner.prop.at(t, 1.0).phase_distance(target);
    let (d_grid, d_ref) = (direct(t_grid), direct(t_ref));
    Ok(if d_ref < d_grid { (t_ref, d_ref) } else { (t_grid, d_grid) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ErgodicityVerdict {
    NotErgodicDegenerate,
    NotErgodicRationalRelation,
    ErgodicAtBound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErgodicityReport {
    pub degenerate: bool,
    pub min_gap: f64,
    pub relations_found: Vec<Vec<i64>>,
    pub coefficient_bound: i64,
    pub tolerance: f64,
    pub verdict: ErgodicityVerdict,
    pub eigenvalues: Vec<f64>,
}

impl ErgodicityReport {
    pub fn to_json(&self) -> Value {
        json!({
            "degenerate": self.degenerate,
            "min_gap": if self.min_gap.is_finite() { json!(self.min_gap) } else { Value::Null },
            "relations": self.relations_found,
            "coefficient_bound": self.coefficient_bound,
            "tolerance": self.tolerance,
            "eigenvalues": self.eigenvalues,
            "verdict": format!("{:?}", self.verdict),
        })
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Largest dimension accepted by the exhaustive relation search.
pub const ERGODICITY_MAX_DIM: usize = 8;
const ERGODICITY_MAX_CANDIDATES: u128 = 200_000_000;

/// Degeneracy check plus an exhaustive search for integer relations
/// `Σ k_i λ_i ≈ 0` with `Σ k_i = 0` and `‖k‖_∞ ≤ coefficient_bound`.
///
/// Relations are reported once per sign pair (first nonzero entry positive)
/// and only in primitive form (entries with gcd 1); multiples are implied.
/// The `Σ k_i = 0` constraint makes the search blind to energy shifts, which
/// only contribute a global phase to the time orbit.
pub fn ergodicity_report(h: &HermitianOp, coefficient_bound: i64, tolerance: f64, cluster_tol: f64) -> Result<ErgodicityReport> {
    let d = h.dim();
    if d > ERGODICITY_MAX_DIM {
        return Err(QsError::capacity(format!(
            "exhaustive relation search supports dim <= {ERGODICITY_MAX_DIM}, got {d}"
        )));
    }
    if coefficient_bound < 1 {
        return Err(QsError::arg("coefficient bound must be at least 1"));
    }
    let candidates = ((2 * coefficient_bound + 1) as u128).pow(d as u32);
    if candidates > ERGODICITY_MAX_CANDIDATES {
        return Err(QsError::capacity(format!("{candidates} candidate relations exceed the search cap")));
    }
    let sd = spectral_decompose(h, cluster_tol)?;
    let lams = h.eigenvalues();
    let min_gap = lams.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);

    let b = coefficient_bound;
    let mut k = vec![-b; d];
    let mut relations = Vec::new();
    loop {
        let sum: i64 = k.iter().sum();
        if sum == 0 {
            if let Some(first) = k.iter().find(|&&x| x != 0) {
                if *first > 0 && k.iter().fold(0, |g, &x| gcd(g, x.unsigned_abs())) == 1 {
                    let val: f64 = k.iter().zip(&lams).map(|(&ki, l)| ki as f64 * l).sum();
                    if val.abs() < tolerance {
                        relations.push(k.clone());
                    }
                }
            }
        }
        // odometer
        let mut pos = d;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            if k[pos] < b {
                k[pos] += 1;
                break;
            }
            k[pos] = -b;
            if pos == 0 {
                pos = usize::MAX;
                break;
            }
        }
        if pos == usize::MAX || d == 0 {
            break;
        }
    }

    let degenerate = sd.is_degenerate();
    let verdict = if degenerate {
        ErgodicityVerdict::NotErgodicDegenerate
    } else if !relations.is_empty() {
        ErgodicityVerdict::NotErgodicRationalRelation
    } else {
        ErgodicityVerdict::ErgodicAtBound
    };
    Ok(ErgodicityReport {
        degenerate,
        min_gap,
        relations_found: relations,
        coefficient_bound,
        tolerance,
        verdict,
        eigenvalues: lams,
    })
}

/// Real-linear dimension of `{X Hermitian : [X,h] = 0}` as counted by the
/// generator construction; convenience for reports.
pub fn commutant_dimension(h: &HermitianOp, cluster_tol: f64) -> Result<usize> {
    Ok(commutant_basis(h, cluster_tol)?.dim_total)
}
