//! Seeded random matrices and states. Every generator takes an explicit RNG so
//! outputs are reproducible per seed; there is no global RNG state.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hilbert::{CMatrix, CVector, HermitianOp, Ket, UnitaryOp, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Complex Ginibre matrix with standard normal real and imaginary parts.
pub fn ginibre(dim: usize, rng: &mut impl Rng) -> CMatrix {
    DMatrix::from_fn(dim, dim, |_, _| gaussian(rng))
}

/// Haar-like unitary: QR of a Ginibre matrix with the phases of `diag(R)`
/// moved into `Q`.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> UnitaryOp {
    let g = ginibre(dim, rng);
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        q.column_mut(k).iter_mut().for_each(|x| *x *= ph);
    }
    UnitaryOp::from_matrix_unchecked(q)
}

/// Hermitian matrix `(G + G†)/2` from a Ginibre sample.
pub fn gaussian_hermitian(dim: usize, rng: &mut impl Rng) -> HermitianOp {
    HermitianOp::symmetrized(ginibre(dim, rng))
}

pub fn random_ket(dim: usize, rng: &mut impl Rng) -> Ket {
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    Ket::normalized(v).expect("gaussian vector is non-zero with probability one")
}

pub fn random_density(dim: usize, rng: &mut impl Rng) -> HermitianOp {
    let g = ginibre(dim, rng);
    let m = &g * g.adjoint();
    let tr = m.trace();
    HermitianOp::symmetrized(m / tr)
}
