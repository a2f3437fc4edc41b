//! Dense finite-dimensional complex linear algebra: kets, Hermitian and
//! unitary operators, Kronecker products, partial traces, clustered spectral
//! decompositions and unitary conjugation.
//!
//! Every value is immutable once built. Constructors validate the defining
//! invariant (unit norm, Hermiticity, unitarity) against the absolute
//! tolerances below.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{QsError, Result};
use crate::kstruct::Tps;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const NORM_TOL: f64 = 1e-12;
pub const HERM_TOL: f64 = 1e-12;
pub const UNIT_TOL: f64 = 1e-10;
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Largest Hilbert-space dimension any builder will produce (8 qubits).
pub const MAX_DIM: usize = 256;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// A normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amps: CVector,
}

impl Ket {
    /// Wraps `amps`, rejecting vectors whose norm is not 1 within [`NORM_TOL`].
    pub fn new(amps: CVector) -> Result<Self> {
        if amps.is_empty() {
            return Err(QsError::arg("ket must have positive dimension"));
        }
        let n = amps.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(QsError::arg(format!("ket norm {n} is not 1")));
        }
        Ok(Self { amps })
    }

    /// Normalizes `amps`; fails only on the zero vector.
    pub fn normalized(amps: CVector) -> Result<Self> {
        let n = amps.norm();
        if amps.is_empty() || n < 1e-300 {
            return Err(QsError::arg("cannot normalize a zero vector"));
        }
        Ok(Self { amps: amps / C64::from(n) })
    }

    pub fn from_slice(amps: &[C64]) -> Result<Self> {
        Self::normalized(CVector::from_column_slice(amps))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut amps = CVector::zeros(dim);
        amps[index] = ONE;
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn apply(&self, u: &UnitaryOp) -> Result<Ket> {
        check_dims(u.dim(), self.dim(), "unitary", "ket")?;
        Ok(Ket { amps: u.matrix() * &self.amps })
    }

    /// `⟨ψ|A|ψ⟩`, real because `A` is Hermitian.
    pub fn expectation(&self, a: &HermitianOp) -> f64 {
        let av = a.matrix() * &self.amps;
        self.amps.dotc(&av).re
    }

    pub fn phase_rotated(&self, theta: f64) -> Ket {
        Ket { amps: &self.amps * C64::from_polar(1.0, theta) }
    }

    /// `|ψ⟩⟨ψ|`
    pub fn projector(&self) -> HermitianOp {
        HermitianOp { m: &self.amps * self.amps.adjoint() }
    }
}

/// A Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOp {
    m: CMatrix,
}

impl HermitianOp {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let res = hermiticity_residual(&m);
        if res > HERM_TOL * m.norm().max(1.0) {
            return Err(QsError::arg(format!("operator is not Hermitian (residual {res:.3e})")));
        }
        Ok(Self::symmetrized(m))
    }

    /// `(m + m†)/2` with no tolerance check. Used internally on products that
    /// are Hermitian in exact arithmetic.
    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let h = (&m + m.adjoint()) * C64::from(0.5);
        Self { m: h }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::from(x)));
        Self { m: CMatrix::from_diagonal(&v) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: CMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: &self.m * C64::from(s) }
    }

    pub fn add(&self, other: &HermitianOp) -> Result<Self> {
        check_dims(self.dim(), other.dim(), "left", "right")?;
        Ok(Self { m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &HermitianOp) -> Result<Self> {
        check_dims(self.dim(), other.dim(), "left", "right")?;
        Ok(Self { m: &self.m - &other.m })
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.m.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn commutator_norm(&self, other: &CMatrix) -> f64 {
        commutator(&self.m, other).norm()
    }
}

/// A unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOp {
    m: CMatrix,
}

impl UnitaryOp {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let res = unitarity_residual(&m);
        if res > UNIT_TOL {
            return Err(QsError::arg(format!("operator is not unitary (residual {res:.3e})")));
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim) }
    }

    /// `e^{iθ}·I`
    pub fn global_phase(dim: usize, theta: f64) -> Self {
        Self { m: CMatrix::identity(dim, dim) * C64::from_polar(1.0, theta) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    /// The inverse, which is the adjoint.
    pub fn inverse(&self) -> Self {
        self.adjoint()
    }

    pub fn compose(&self, other: &UnitaryOp) -> Result<Self> {
        check_dims(self.dim(), other.dim(), "left", "right")?;
        Ok(Self { m: &self.m * &other.m })
    }

    /// Phase-invariant Frobenius distance `min_φ ‖e^{iφ}·self − other‖_F`.
    pub fn phase_distance(&self, other: &UnitaryOp) -> f64 {
        phase_distance(&self.m, &other.m)
    }
}

pub(crate) fn phase_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    // The optimal phase aligns tr(b†a) with the positive real axis.
    let tr: C64 = b.iter().zip(a.iter()).map(|(bi, ai)| bi.conj() * ai).sum();
    let phase = if tr.norm() > 0.0 { tr.conj() / tr.norm() } else { ONE };
    (a * phase - b).norm()
}

/// Clustered spectral decomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    /// Distinct clustered eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<HermitianOp>,
    pub multiplicities: Vec<usize>,
    /// Orthonormal eigenvectors of each cluster, one column per vector.
    pub eigenvectors: Vec<CMatrix>,
}

impl SpectralDecomp {
    pub fn dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// `Σ λ_i P_i`
    pub fn reconstruct(&self) -> HermitianOp {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (lam, p) in self.eigenvalues.iter().zip(&self.projectors) {
            m += p.matrix() * C64::from(*lam);
        }
        HermitianOp { m }
    }

    /// Index of the cluster a raw eigenvalue falls into.
    pub fn cluster_of(&self, value: f64) -> usize {
        let mut best = 0;
        for (i, lam) in self.eigenvalues.iter().enumerate() {
            if (lam - value).abs() < (self.eigenvalues[best] - value).abs() {
                best = i;
            }
        }
        best
    }

    pub fn is_degenerate(&self) -> bool {
        self.multiplicities.iter().any(|&m| m > 1)
    }
}

/// Kronecker products of kets and operators, in the order given.
pub trait TensorFactor: Sized {
    fn kron_with(&self, other: &Self) -> Self;
}

impl TensorFactor for Ket {
    fn kron_with(&self, other: &Self) -> Self {
        Ket { amps: self.amps.kronecker(&other.amps) }
    }
}

impl TensorFactor for HermitianOp {
    fn kron_with(&self, other: &Self) -> Self {
        HermitianOp { m: self.m.kronecker(&other.m) }
    }
}

impl TensorFactor for UnitaryOp {
    fn kron_with(&self, other: &Self) -> Self {
        UnitaryOp { m: self.m.kronecker(&other.m) }
    }
}

pub fn tensor_product<T: TensorFactor + Clone>(items: &[T]) -> Result<T> {
    let (first, rest) = items
        .split_first()
        .ok_or_else(|| QsError::arg("tensor product of an empty list"))?;
    Ok(rest.iter().fold(first.clone(), |acc, x| acc.kron_with(x)))
}

/// Reduced operator on the factors listed in `keep`, relative to `tps`.
///
/// `rho` is first pulled back through the identification map so the trace
/// runs over the tensor-product basis of the factor spaces. Kept factors stay
/// in ascending order.
pub fn partial_trace(rho: &HermitianOp, tps: &Tps, keep: &[usize]) -> Result<HermitianOp> {
    check_dims(rho.dim(), tps.total_dim(), "operator", "tps")?;
    let pulled = tps.pull_back(rho.matrix());
    let m = partial_trace_raw(&pulled, tps.factor_dims(), keep)?;
    Ok(HermitianOp::symmetrized(m))
}

/// Partial trace over the computational tensor basis with the given factor
/// dimensions (first factor most significant).
pub(crate) fn partial_trace_raw(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let n = dims.len();
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.is_empty() {
        return Err(QsError::arg("keep must be a non-empty subset of the factors"));
    }
    if keep_sorted.iter().any(|&k| k >= n) {
        return Err(QsError::arg(format!("factor index out of range (have {n} factors)")));
    }
    let total: usize = dims.iter().product();
    check_dims(m.nrows(), total, "operator", "factor dims")?;
    if keep_sorted.len() == n {
        return Ok(m.clone());
    }
    let traced: Vec<usize> = (0..n).filter(|k| !keep_sorted.contains(k)).collect();
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced_dims.iter().product();

    // full index from (kept multi-index, traced multi-index)
    let strides = strides(dims);
    let kept_offsets: Vec<usize> = (0..dk)
        .map(|a| offset_of(a, &kept_dims, &keep_sorted, &strides))
        .collect();
    let traced_offsets: Vec<usize> = (0..dt)
        .map(|b| offset_of(b, &traced_dims, &traced, &strides))
        .collect();

    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = ZERO;
            for &t in &traced_offsets {
                acc += m[(kept_offsets[i] + t, kept_offsets[j] + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn offset_of(mut idx: usize, sub_dims: &[usize], factors: &[usize], strides: &[usize]) -> usize {
    let mut off = 0;
    for (pos, &f) in factors.iter().enumerate().rev() {
        let d = sub_dims[pos];
        off += (idx % d) * strides[f];
        idx /= d;
    }
    off
}

/// Eigen-decomposition with eigenvalues closer than `cluster_tol` merged into
/// one eigenspace. Clustering is single-linkage over the sorted spectrum.
pub fn spectral_decompose(a: &HermitianOp, cluster_tol: f64) -> Result<SpectralDecomp> {
    let res = hermiticity_residual(a.matrix());
    if res > HERM_TOL * a.matrix().norm().max(1.0) {
        return Err(QsError::arg(format!("spectral_decompose needs a Hermitian input (residual {res:.3e})")));
    }
    let (vals, vecs) = sorted_eigh(a.matrix());
    let d = vals.len();

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..d {
        match groups.last_mut() {
            Some(g) if vals[i] - vals[*g.last().unwrap()] <= cluster_tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }

    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    let mut multiplicities = Vec::with_capacity(groups.len());
    let mut eigenvectors = Vec::with_capacity(groups.len());
    for g in groups {
        let mean = g.iter().map(|&i| vals[i]).sum::<f64>() / g.len() as f64;
        let cols: Vec<CVector> = g.iter().map(|&i| vecs.column(i).into_owned()).collect();
        let basis = CMatrix::from_columns(&cols);
        let p = &basis * basis.adjoint();
        eigenvalues.push(mean);
        projectors.push(HermitianOp::symmetrized(p));
        multiplicities.push(g.len());
        eigenvectors.push(basis);
    }
    Ok(SpectralDecomp { eigenvalues, projectors, multiplicities, eigenvectors })
}

/// Eigenpairs sorted by ascending eigenvalue.
pub(crate) fn sorted_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<CVector> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    (vals, CMatrix::from_columns(&cols))
}

/// `S·A·S†`
pub fn conjugate(a: &HermitianOp, s: &UnitaryOp) -> Result<HermitianOp> {
    check_dims(a.dim(), s.dim(), "operator", "unitary")?;
    Ok(HermitianOp::symmetrized(s.matrix() * a.matrix() * s.matrix().adjoint()))
}

/// `exp(−i·h·t/ħ)` through the eigen-decomposition of `h`.
pub fn evolve(h: &HermitianOp, t: f64, hbar: f64) -> UnitaryOp {
    Propagator::new(h).at(t, hbar)
}

/// Cached eigen-decomposition of a generator, for repeated evaluation of
/// `exp(−i·h·t/ħ)` at many times.
#[derive(Clone, Debug)]
pub struct Propagator {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl Propagator {
    pub fn new(h: &HermitianOp) -> Self {
        let (eigenvalues, eigenvectors) = sorted_eigh(h.matrix());
        Self { eigenvalues, eigenvectors }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn at(&self, t: f64, hbar: f64) -> UnitaryOp {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, lam) in self.eigenvalues.iter().enumerate() {
            let ph = C64::from_polar(1.0, -lam * t / hbar);
            scaled.column_mut(k).iter_mut().for_each(|x| *x *= ph);
        }
        UnitaryOp { m: scaled * v.adjoint() }
    }

    pub fn evolve_ket(&self, psi: &Ket, t: f64, hbar: f64) -> Ket {
        let v = &self.eigenvectors;
        let mut coeffs = v.adjoint() * psi.amplitudes();
        for (k, lam) in self.eigenvalues.iter().enumerate() {
            coeffs[k] *= C64::from_polar(1.0, -lam * t / hbar);
        }
        Ket { amps: v * coeffs }
    }
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn unitarity_residual(m: &CMatrix) -> f64 {
    (m * m.adjoint() - CMatrix::identity(m.nrows(), m.ncols())).norm()
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(QsError::arg(format!("expected a non-empty square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

pub(crate) fn check_dims(a: usize, b: usize, what_a: &str, what_b: &str) -> Result<()> {
    if a != b {
        return Err(QsError::arg(format!("dimension mismatch: {what_a} has dim {a}, {what_b} has dim {b}")));
    }
    Ok(())
}

/// Pauli matrices and a few fixed kets used throughout tests and examples.
pub mod named {
    use super::*;

    pub fn sigma_x() -> HermitianOp {
        HermitianOp { m: CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]) }
    }

    pub fn sigma_y() -> HermitianOp {
        HermitianOp { m: CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]) }
    }

    pub fn sigma_z() -> HermitianOp {
        HermitianOp::from_real_diagonal(&[1.0, -1.0])
    }

    pub fn hadamard() -> UnitaryOp {
        let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        UnitaryOp { m: CMatrix::from_row_slice(2, 2, &[s, s, s, -s]) }
    }

    pub fn plus() -> Ket {
        Ket::from_slice(&[ONE, ONE]).unwrap()
    }

    pub fn minus() -> Ket {
        Ket::from_slice(&[ONE, -ONE]).unwrap()
    }

    /// `(|00⟩ + |11⟩)/√2`
    pub fn bell() -> Ket {
        Ket::from_slice(&[ONE, ZERO, ZERO, ONE]).unwrap()
    }

    pub fn ghz(n: usize) -> Ket {
        let d = 1 << n;
        let mut v = CVector::zeros(d);
        v[0] = ONE;
        v[d - 1] = ONE;
        Ket::normalized(v).unwrap()
    }

    pub fn w_state(n: usize) -> Ket {
        let d = 1 << n;
        let mut v = CVector::zeros(d);
        for k in 0..n {
            v[1 << k] = ONE;
        }
        Ket::normalized(v).unwrap()
    }

    /// Operator `op` on factor `site` of `n` qubits, identity elsewhere.
    pub fn on_site(op: &HermitianOp, site: usize, n: usize) -> HermitianOp {
        let id = HermitianOp::identity(op.dim());
        let ops: Vec<HermitianOp> = (0..n).map(|k| if k == site { op.clone() } else { id.clone() }).collect();
        tensor_product(&ops).expect("n >= 1")
    }
}
