//! Hamiltonian builders: a lattice-discretized nonrelativistic many-particle
//! model on a ring, transverse-field Ising chains, the interaction-only
//! spin-bath decoherence model, and random Hamiltonians with a prescribed
//! spectrum. Every builder returns its canonical tensor product structure.

use serde::{Deserialize, Serialize};

use crate::error::{QsError, Result};
use crate::hilbert::{named, CMatrix, CVector, HermitianOp, C64, MAX_DIM};
use crate::kstruct::Tps;
use crate::sampling::{haar_unitary, rng};

/// Pairwise interaction as a function of integer ring distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Potential {
    /// No interaction.
    Free,
    /// `strength / (d + 1)`
    CoulombRegularized { strength: f64 },
    /// `strength · d²`
    Harmonic { strength: f64 },
    /// `strength` when the particles share a site.
    Contact { strength: f64 },
}

impl Potential {
    pub fn value(&self, distance: usize) -> f64 {
        let d = distance as f64;
        match *self {
            Potential::Free => 0.0,
            Potential::CoulombRegularized { strength } => strength / (d + 1.0),
            Potential::Harmonic { strength } => strength * d * d,
            Potential::Contact { strength } => {
                if distance == 0 {
                    strength
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NrqmLatticeSpec {
    pub particles: usize,
    pub sites: usize,
    pub masses: Vec<f64>,
    pub hbar: f64,
    pub potential: Potential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZurekSpec {
    pub couplings: Vec<f64>,
    #[serde(default = "one")]
    pub hbar: f64,
}

fn one() -> f64 {
    1.0
}

impl ZurekSpec {
    pub fn new(couplings: Vec<f64>) -> Self {
        Self { couplings, hbar: 1.0 }
    }

    pub fn env_count(&self) -> usize {
        self.couplings.len()
    }
}

pub(crate) fn ring_distance(a: usize, b: usize, sites: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(sites - d)
}

/// `ħ²/2m_j` times the nearest-neighbour ring Laplacian on each particle,
/// plus `Σ_{j≠k} V(|x_j − x_k|)` over ordered pairs.
pub fn build_nrqm_lattice(spec: &NrqmLatticeSpec) -> Result<(HermitianOp, Tps)> {
    let (n, l) = (spec.particles, spec.sites);
    if n == 0 || l < 2 {
        return Err(QsError::arg("need at least one particle and two sites"));
    }
    if spec.masses.len() != n || spec.masses.iter().any(|&m| m <= 0.0) {
        return Err(QsError::arg("one positive mass per particle is required"));
    }
    if spec.hbar <= 0.0 {
        return Err(QsError::arg("hbar must be positive"));
    }
    let dim = (l as u128).checked_pow(n as u32).filter(|&d| d <= MAX_DIM as u128).ok_or_else(|| {
        QsError::capacity(format!("{l}^{n} exceeds the dimension cap {MAX_DIM}"))
    })? as usize;

    let digits = |mut idx: usize| -> Vec<usize> {
        let mut out = vec![0; n];
        for slot in out.iter_mut().rev() {
            *slot = idx % l;
            idx /= l;
        }
        out
    };
    let stride = |j: usize| l.pow((n - 1 - j) as u32);

    let mut h = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let x = digits(idx);
        for j in 0..n {
            let c = spec.hbar * spec.hbar / (2.0 * spec.masses[j]);
            h[(idx, idx)] += C64::from(2.0 * c);
            let up = idx - x[j] * stride(j) + ((x[j] + 1) % l) * stride(j);
            let down = idx - x[j] * stride(j) + ((x[j] + l - 1) % l) * stride(j);
            h[(idx, up)] -= C64::from(c);
            h[(idx, down)] -= C64::from(c);
        }
        let mut v = 0.0;
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    v += spec.potential.value(ring_distance(x[j], x[k], l));
                }
            }
        }
        h[(idx, idx)] += C64::from(v);
    }
    Ok((HermitianOp::symmetrized(h), Tps::computational(vec![l; n])?))
}

/// `−J Σ σz_i σz_{i+1} − h Σ σx_i` on `n` qubits.
pub fn build_ising_chain(n: usize, j: f64, h: f64, periodic: bool) -> Result<(HermitianOp, Tps)> {
    if !(2..=8).contains(&n) {
        return Err(QsError::capacity(format!("ising chain length {n} outside 2..=8")));
    }
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim, dim);
    let bonds: Vec<(usize, usize)> = {
        let mut b: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        // for n = 2 the wrap-around bond duplicates (0,1)
        if periodic && n > 2 {
            b.push((n - 1, 0));
        }
        b
    };
    let bit = |idx: usize, site: usize| (idx >> (n - 1 - site)) & 1;
    for idx in 0..dim {
        let zz: f64 = bonds
            .iter()
            .map(|&(a, b)| if bit(idx, a) == bit(idx, b) { 1.0 } else { -1.0 })
            .sum();
        m[(idx, idx)] += C64::from(-j * zz);
        for site in 0..n {
            let flipped = idx ^ (1 << (n - 1 - site));
            m[(idx, flipped)] += C64::from(-h);
        }
    }
    Ok((HermitianOp::symmetrized(m), Tps::qubits(n)))
}

/// `σz_S ⊗ Σ_k g_k σz^{(k)}`; the system is factor 0.
pub fn build_zurek(spec: &ZurekSpec) -> Result<(HermitianOp, Tps)> {
    let n_env = spec.env_count();
    if n_env == 0 || n_env + 1 > 8 {
        return Err(QsError::capacity(format!("spin bath with {n_env} environment spins outside 1..=7")));
    }
    let n = n_env + 1;
    let dim = 1 << n;
    let diag: Vec<f64> = (0..dim)
        .map(|idx| {
            let z = |site: usize| if (idx >> (n - 1 - site)) & 1 == 0 { 1.0 } else { -1.0 };
            let bath: f64 = spec.couplings.iter().enumerate().map(|(k, g)| g * z(k + 1)).sum();
            z(0) * bath
        })
        .collect();
    Ok((HermitianOp::from_real_diagonal(&diag), Tps::qubits(n)))
}

/// `σz_S ⊗ I_env`, the conserved pointer observable of the spin-bath model.
pub fn zurek_pointer_observable(spec: &ZurekSpec) -> HermitianOp {
    named::on_site(&named::sigma_z(), 0, spec.env_count() + 1)
}

/// `V·diag(λ)·V†` with `V` Haar-like from `seed`.
pub fn build_random_spectrum(eigenvalues: &[f64], seed: u64) -> Result<HermitianOp> {
    let d = eigenvalues.len();
    if d == 0 || d > MAX_DIM {
        return Err(QsError::capacity(format!("spectrum length {d} outside 1..={MAX_DIM}")));
    }
    let v = haar_unitary(d, &mut rng(seed));
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(d, eigenvalues.iter().map(|&x| C64::from(x))));
    Ok(HermitianOp::symmetrized(v.matrix() * diag * v.matrix().adjoint()))
}

/// Model description loadable from JSON as `{"model": name, "params": {…}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "params", rename_all = "snake_case")]
pub enum ModelSpec {
    Nrqm(NrqmLatticeSpec),
    Ising {
        n: usize,
        #[serde(rename = "J")]
        j: f64,
        h: f64,
        #[serde(default)]
        periodic: bool,
    },
    Zurek(ZurekSpec),
    RandomSpectrum { eigenvalues: Vec<f64>, seed: u64 },
    /// Diagonal Hamiltonian with the given entries, optionally factored.
    Diagonal {
        eigenvalues: Vec<f64>,
        #[serde(default)]
        factor_dims: Option<Vec<usize>>,
    },
}

/// A built model: Hamiltonian, canonical factorization and its `ħ`.
#[derive(Clone, Debug)]
pub struct Model {
    pub id: String,
    pub hamiltonian: HermitianOp,
    pub tps: Tps,
    pub hbar: f64,
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| QsError::Schema(format!("model spec: {e}")))
    }

    pub fn id(&self) -> String {
        match self {
            ModelSpec::Nrqm(s) => format!("nrqm-n{}-L{}", s.particles, s.sites),
            ModelSpec::Ising { n, periodic, .. } => format!("ising-n{n}{}", if *periodic { "-periodic" } else { "" }),
            ModelSpec::Zurek(s) => format!("zurek-N{}", s.env_count()),
            ModelSpec::RandomSpectrum { eigenvalues, seed } => format!("random-d{}-s{seed}", eigenvalues.len()),
            ModelSpec::Diagonal { eigenvalues, .. } => format!("diagonal-d{}", eigenvalues.len()),
        }
    }

    pub fn build(&self) -> Result<Model> {
        let (hamiltonian, tps, hbar) = match self {
            ModelSpec::Nrqm(s) => {
                let (h, t) = build_nrqm_lattice(s)?;
                (h, t, s.hbar)
            }
            ModelSpec::Ising { n, j, h, periodic } => {
                let (h, t) = build_ising_chain(*n, *j, *h, *periodic)?;
                (h, t, 1.0)
            }
            ModelSpec::Zurek(s) => {
                let (h, t) = build_zurek(s)?;
                (h, t, s.hbar)
            }
            ModelSpec::RandomSpectrum { eigenvalues, seed } => {
                let h = build_random_spectrum(eigenvalues, *seed)?;
                let t = Tps::computational(prime_ish_factors(h.dim()))?;
                (h, t, 1.0)
            }
            ModelSpec::Diagonal { eigenvalues, factor_dims } => {
                if eigenvalues.is_empty() || eigenvalues.len() > MAX_DIM {
                    return Err(QsError::capacity("diagonal model size outside 1..=256"));
                }
                let h = HermitianOp::from_real_diagonal(eigenvalues);
                let dims = factor_dims.clone().unwrap_or_else(|| prime_ish_factors(h.dim()));
                (h, Tps::computational(dims)?, 1.0)
            }
        };
        Ok(Model { id: self.id(), hamiltonian, tps, hbar })
    }
}

/// Factor dimensions for an unstructured space: qubits when the dimension is
/// a power of two, otherwise a single factor.
fn prime_ish_factors(dim: usize) -> Vec<usize> {
    if dim >= 2 && dim.is_power_of_two() {
        vec![2; dim.trailing_zeros() as usize]
    } else {
        vec![dim.max(2)]
    }
}
