//! Independent reference computations for the integration tests. Everything
//! here is written with explicit index loops and does not call the library's
//! own linear algebra beyond constructing inputs.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use qslab::hilbert::{CMatrix, HermitianOp};

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn pauli(k: usize) -> CMatrix {
    let z = C::new(0.0, 0.0);
    let o = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    match k {
        0 => CMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        1 => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        _ => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

pub fn pauli_string(idx: &[usize]) -> CMatrix {
    idx.iter().fold(CMatrix::identity(1, 1), |acc, &k| kron(&acc, &pauli(k)))
}

/// Coefficients `tr(P·h)/2^n` over all Pauli strings, keyed by the string.
pub fn pauli_coefficients(h: &CMatrix, n: usize) -> Vec<(Vec<usize>, C)> {
    let mut out = Vec::new();
    for code in 0..4usize.pow(n as u32) {
        let idx: Vec<usize> = (0..n).map(|q| (code / 4usize.pow((n - 1 - q) as u32)) % 4).collect();
        let p = pauli_string(&idx);
        let c = (&p * h).trace() / C::from((1u64 << n) as f64);
        out.push((idx, c));
    }
    out
}

/// Largest number of non-identity factors over Pauli strings with
/// `|coefficient| > floor`.
pub fn qubit_locality(h: &CMatrix, n: usize, floor: f64) -> usize {
    pauli_coefficients(h, n)
        .into_iter()
        .filter(|(_, c)| c.norm() > floor)
        .map(|(idx, _)| idx.iter().filter(|&&k| k != 0).count())
        .max()
        .unwrap_or(0)
}

/// Partial trace over the second factor of a `da ⊗ db` operator.
pub fn trace_out_second(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    let mut out = CMatrix::zeros(da, da);
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                out[(i, j)] += m[(i * db + k, j * db + k)];
            }
        }
    }
    out
}

/// Partial trace over the first factor of a `da ⊗ db` operator.
pub fn trace_out_first(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    let mut out = CMatrix::zeros(db, db);
    for i in 0..db {
        for j in 0..db {
            for k in 0..da {
                out[(i, j)] += m[(k * db + i, k * db + j)];
            }
        }
    }
    out
}

/// Real dimension of `{X Hermitian : [X, h] = 0}`, from the rank of the
/// real-linear map `X ↦ [X, h]` written in a basis of Hermitian matrices.
pub fn commutant_null_dim(h: &HermitianOp) -> usize {
    let d = h.dim();
    let hm = h.matrix();
    let mut basis: Vec<CMatrix> = Vec::new();
    for j in 0..d {
        for k in 0..d {
            let mut x = CMatrix::zeros(d, d);
            if j == k {
                x[(j, j)] = C::new(1.0, 0.0);
            } else if j < k {
                x[(j, k)] = C::new(1.0, 0.0);
                x[(k, j)] = C::new(1.0, 0.0);
            } else {
                x[(j, k)] = C::new(0.0, 1.0);
                x[(k, j)] = C::new(0.0, -1.0);
            }
            basis.push(x);
        }
    }
    let mut map = DMatrix::<f64>::zeros(2 * d * d, d * d);
    for (col, x) in basis.iter().enumerate() {
        let c = x * hm - hm * x;
        for (row, z) in c.iter().enumerate() {
            map[(2 * row, col)] = z.re;
            map[(2 * row + 1, col)] = z.im;
        }
    }
    let sv = map.singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max).max(1.0);
    let rank = sv.iter().filter(|&&s| s > 1e-9 * top).count();
    d * d - rank
}

/// Eigenvalues of a Hermitian matrix via the real symmetric embedding
/// `[[Re, −Im], [Im, Re]]`, whose spectrum is each eigenvalue twice.
pub fn real_embedding_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    let mut r = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let z = m[(i, j)];
            r[(i, j)] = z.re;
            r[(i + d, j + d)] = z.re;
            r[(i, j + d)] = -z.im;
            r[(i + d, j)] = z.im;
        }
    }
    let mut ev: Vec<f64> = r.symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

pub fn entropy_nats(eigs: &[f64]) -> f64 {
    eigs.iter().filter(|&&l| l > 1e-12).map(|&l| -l * l.ln()).sum()
}

pub fn sup(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

use qslab::espace::coherent_family;
use qslab::hilbert::{spectral_decompose, Ket, DEFAULT_CLUSTER_TOL};
use qslab::kstruct::{make_basis_structure, make_povm_structure, make_pvm_structure, make_tps_structure, occupation_structure, KStructure, Tps};
use qslab::sampling::{gaussian_hermitian, haar_unitary, rng};

/// `(2/3)|θ_k⟩⟨θ_k|` with real kets at 60° steps (120° on the Bloch sphere).
pub fn trine_effects() -> Vec<HermitianOp> {
    (0..3)
        .map(|k| {
            let th = k as f64 * std::f64::consts::PI / 3.0;
            Ket::from_slice(&[C::new(th.cos(), 0.0), C::new(th.sin(), 0.0)]).unwrap().projector().scale(2.0 / 3.0)
        })
        .collect()
}

/// One instance of each structure kind the crate ships, all at dim ≤ 16.
pub fn shipped_structures() -> Vec<(&'static str, KStructure)> {
    let u = haar_unitary(6, &mut rng(101));
    let vecs: Vec<Ket> = (0..6).map(|i| Ket::normalized(u.matrix().column(i).into_owned()).unwrap()).collect();
    let basis = make_basis_structure(&vecs).unwrap();

    let degenerate = {
        let a = gaussian_hermitian(6, &mut rng(102));
        let sd = spectral_decompose(&a, DEFAULT_CLUSTER_TOL).unwrap();
        let p = |r: std::ops::Range<usize>| {
            r.fold(CMatrix::zeros(6, 6), |acc, i| acc + sd.projectors[i].matrix())
        };
        vec![
            HermitianOp::new(p(0..2)).unwrap(),
            HermitianOp::new(p(2..3)).unwrap(),
            HermitianOp::new(p(3..6)).unwrap(),
        ]
    };
    let pvm = make_pvm_structure(&degenerate).unwrap();
    let trine = make_povm_structure(&trine_effects()).unwrap();
    let tps = make_tps_structure(&Tps::computational(vec![2, 2, 3]).unwrap(), 2, 103).unwrap();
    let occ = occupation_structure(&Tps::qubits(4)).unwrap();
    let frame = coherent_family(8, 1.0).unwrap().povm_structure();
    vec![
        ("basis", basis),
        ("pvm", pvm),
        ("trine-povm", trine),
        ("tps-commuting-set", tps),
        ("occupation", occ),
        ("coherent-frame", frame),
    ]
}

use qslab::models::{build_ising_chain, build_nrqm_lattice, build_zurek, build_random_spectrum, NrqmLatticeSpec, Potential, ZurekSpec};

/// `(name, H, tps)` for every model family.
pub fn model_suite() -> Vec<(&'static str, HermitianOp, Tps)> {
    let (ising, t1) = build_ising_chain(3, 1.0, 1.0, true).unwrap();
    let nrqm_spec = NrqmLatticeSpec {
        particles: 2,
        sites: 3,
        masses: vec![1.0, 2.0],
        hbar: 1.0,
        potential: Potential::CoulombRegularized { strength: 1.0 },
    };
    let (nrqm, t2) = build_nrqm_lattice(&nrqm_spec).unwrap();
    let (zurek, t3) = build_zurek(&ZurekSpec::new(vec![1.0, 0.7])).unwrap();
    let random = build_random_spectrum(&[-1.0, -0.3, 0.2, 0.9, 1.4, 2.0], 11).unwrap();
    let diag = HermitianOp::from_real_diagonal(&[0.0, 1.0, 2f64.sqrt(), 3.1]);
    vec![
        ("ising3", ising, t1),
        ("nrqm-2x3", nrqm, t2),
        ("zurek2", zurek, t3),
        ("random6", random, Tps::computational(vec![2, 3]).unwrap()),
        ("diag4", diag, Tps::qubits(2)),
    ]
}

pub fn nrqm_2x3() -> HermitianOp {
    model_suite().into_iter().find(|m| m.0 == "nrqm-2x3").unwrap().1
}
