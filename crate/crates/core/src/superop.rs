//! Operators, superoperators and Choi matrices.
//!
//! Operators are vectorized by stacking columns: entry `(i, j)` of an N × N
//! operator lands at index `j * N + i`. With that convention
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`, which is how every superoperator below is
//! assembled. Choi matrices use the normalized maximally entangled state
//! `|Ω⟩ = N^{-1/2} Σ_i |ii⟩`, so a trace-preserving map has a unit-trace Choi
//! matrix.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, kron, CMat, CVec, C64, I, ONE, ZERO};

/// Default tolerance of the positivity predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

/// An N × N complex matrix on the system Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(CMat);

impl OperatorMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() < 2 {
            return Err(Error::InvalidOperator(format!("dimension {} is below 2", m.nrows())));
        }
        if !linalg::is_finite(&m) {
            return Err(Error::InvalidOperator("non-finite entry".into()));
        }
        Ok(Self(m))
    }

    /// Builds an operator from row-major entries. Panics on a non-square
    /// slice; meant for literals.
    pub fn from_rows(n: usize, entries: &[C64]) -> Self {
        Self::new(CMat::from_row_slice(n, n, entries)).expect("valid operator literal")
    }

    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMat::zeros(n, n))
    }

    pub fn pauli_x() -> Self {
        Self::from_rows(2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn pauli_y() -> Self {
        Self::from_rows(2, &[ZERO, -I, I, ZERO])
    }

    pub fn pauli_z() -> Self {
        Self::from_rows(2, &[ONE, ZERO, ZERO, -ONE])
    }

    /// Lowering operator `|1⟩⟨0|`, taking the `σ_z = +1` state to `σ_z = −1`.
    pub fn sigma_minus() -> Self {
        Self::from_rows(2, &[ZERO, ZERO, ONE, ZERO])
    }

    pub fn sigma_plus() -> Self {
        Self::from_rows(2, &[ZERO, ONE, ZERO, ZERO])
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        linalg::frob_diff(&self.0, &self.0.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol * linalg::frob(&self.0).max(1.0)
    }

    pub fn is_traceless(&self, tol: f64) -> bool {
        self.trace().norm() <= tol * linalg::frob(&self.0).max(1.0)
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

/// A linear map on N × N operators, stored as an N² × N² matrix acting on
/// column-stacked operators.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    hdim: usize,
    matrix: CMat,
}

impl SuperOperator {
    pub fn new(hdim: usize, matrix: CMat) -> Result<Self> {
        let d = hdim * hdim;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        if !linalg::is_finite(&matrix) {
            return Err(Error::InvalidOperator("non-finite superoperator entry".into()));
        }
        Ok(Self { hdim, matrix })
    }

    /// Wraps a matrix whose shape is already known to be N² × N².
    pub(crate) fn from_parts(hdim: usize, matrix: CMat) -> Self {
        debug_assert_eq!(matrix.nrows(), hdim * hdim);
        Self { hdim, matrix }
    }

    pub fn identity(hdim: usize) -> Self {
        Self::from_parts(hdim, CMat::identity(hdim * hdim, hdim * hdim))
    }

    pub fn zeros(hdim: usize) -> Self {
        Self::from_parts(hdim, CMat::zeros(hdim * hdim, hdim * hdim))
    }

    pub fn hdim(&self) -> usize {
        self.hdim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn apply(&self, op: &OperatorMatrix) -> OperatorMatrix {
        devectorize(&(&self.matrix * vectorize(op)), self.hdim)
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &SuperOperator) -> SuperOperator {
        Self::from_parts(self.hdim, &self.matrix * &other.matrix)
    }

    pub fn scale(&self, s: f64) -> SuperOperator {
        Self::from_parts(self.hdim, self.matrix.scale(s))
    }

    pub fn scale_complex(&self, s: C64) -> SuperOperator {
        Self::from_parts(self.hdim, &self.matrix * s)
    }

    pub fn norm(&self) -> f64 {
        linalg::frob(&self.matrix)
    }

    pub fn distance(&self, other: &SuperOperator) -> f64 {
        linalg::frob_diff(&self.matrix, &other.matrix)
    }

    pub fn powi(&self, n: u32) -> SuperOperator {
        let mut acc = Self::identity(self.hdim);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            k >>= 1;
        }
        acc
    }
}

impl Add for &SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: &SuperOperator) -> SuperOperator {
        SuperOperator::from_parts(self.hdim, &self.matrix + &rhs.matrix)
    }
}

impl Sub for &SuperOperator {
    type Output = SuperOperator;
    fn sub(self, rhs: &SuperOperator) -> SuperOperator {
        SuperOperator::from_parts(self.hdim, &self.matrix - &rhs.matrix)
    }
}

impl Neg for &SuperOperator {
    type Output = SuperOperator;
    fn neg(self) -> SuperOperator {
        SuperOperator::from_parts(self.hdim, -&self.matrix)
    }
}

impl Mul for &SuperOperator {
    type Output = SuperOperator;
    fn mul(self, rhs: &SuperOperator) -> SuperOperator {
        self.compose(rhs)
    }
}

/// Choi matrix `(S ⊗ id)|Ω⟩⟨Ω|`. Index `a·N + b` labels `|a⟩ ⊗ |b⟩`, the
/// first factor being the one the map acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    hdim: usize,
    matrix: CMat,
}

impl ChoiMatrix {
    pub fn hdim(&self) -> usize {
        self.hdim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn from_matrix(hdim: usize, matrix: CMat) -> Result<Self> {
        let d = hdim * hdim;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        Ok(Self { hdim, matrix })
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        linalg::frob_diff(&self.matrix, &self.matrix.adjoint())
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_residual() <= rel_tol * linalg::frob(&self.matrix).max(f64::MIN_POSITIVE)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// Restriction `U† C U` to the orthogonal complement of `|Ω⟩`.
    pub fn projected_block(&self) -> CMat {
        let u = omega_complement_basis(self.hdim);
        u.adjoint() * &self.matrix * u
    }
}

pub fn vectorize(op: &OperatorMatrix) -> CVec {
    CVec::from_column_slice(op.matrix().as_slice())
}

/// Inverse of [`vectorize`]. Panics if `v.len() != n * n`.
pub fn devectorize(v: &CVec, n: usize) -> OperatorMatrix {
    assert_eq!(v.len(), n * n, "vector length must be N²");
    OperatorMatrix(CMat::from_column_slice(n, n, v.as_slice()))
}

/// The normalized maximally entangled state `|Ω⟩`.
pub fn maximally_entangled(n: usize) -> CVec {
    let mut v = CVec::zeros(n * n);
    let amp = c(1.0 / (n as f64).sqrt(), 0.0);
    for i in 0..n {
        v[i * n + i] = amp;
    }
    v
}

pub fn omega_complement_basis(n: usize) -> CMat {
    linalg::complement_basis(&maximally_entangled(n))
}

/// Superoperator of `ρ ↦ −i[H, ρ] + Σ_k (A_k ρ A_k† − ½{A_k†A_k, ρ})`.
pub fn lindbladian_matrix(h: &OperatorMatrix, jumps: &[OperatorMatrix]) -> Result<SuperOperator> {
    let n = h.dim();
    if let Some(bad) = jumps.iter().find(|a| a.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.dim(),
        });
    }
    let res = h.hermiticity_residual();
    if res > 1e-10 * linalg::frob(h.matrix()).max(1.0) {
        return Err(Error::NonHermitianHamiltonian(res));
    }
    let mut l = commutator_superop(h).scale_complex(-I).into_matrix();
    for a in jumps {
        l += dissipator_matrix(a);
    }
    Ok(SuperOperator::from_parts(n, l))
}

/// Superoperator of `ρ ↦ [X, ρ]`.
pub fn commutator_superop(x: &OperatorMatrix) -> SuperOperator {
    let n = x.dim();
    let id = CMat::identity(n, n);
    let m = kron(&id, x.matrix()) - kron(&x.matrix().transpose(), &id);
    SuperOperator::from_parts(n, m)
}

fn dissipator_matrix(a: &OperatorMatrix) -> CMat {
    let n = a.dim();
    let id = CMat::identity(n, n);
    let am = a.matrix();
    let ada = am.adjoint() * am;
    kron(&am.conjugate(), am) - (kron(&id, &ada) + kron(&ada.transpose(), &id)).scale(0.5)
}

/// Unitary conjugation `ρ ↦ U ρ U†`.
pub fn conjugation_map(u: &OperatorMatrix) -> SuperOperator {
    SuperOperator::from_parts(u.dim(), kron(&u.matrix().conjugate(), u.matrix()))
}

/// The transpose map `ρ ↦ ρᵀ` (positive but not completely positive).
pub fn transpose_map(n: usize) -> SuperOperator {
    let mut m = CMat::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            m[(i * n + j, j * n + i)] = ONE;
        }
    }
    SuperOperator::from_parts(n, m)
}

/// Generator of the depolarizing semigroup, `ρ ↦ tr(ρ)·1/N − ρ`.
pub fn depolarizing_generator(n: usize) -> SuperOperator {
    let id = vectorize(&OperatorMatrix::identity(n));
    let m = (&id * id.transpose()).scale(1.0 / n as f64) - CMat::identity(n * n, n * n);
    SuperOperator::from_parts(n, m)
}

pub fn choi(s: &SuperOperator) -> ChoiMatrix {
    let n = s.hdim();
    let d = n * n;
    let inv_n = 1.0 / n as f64;
    let m = s.matrix();
    let out = CMat::from_fn(d, d, |row, col| {
        let (a, b) = (row / n, row % n);
        let (cc, dd) = (col / n, col % n);
        m[(cc * n + a, dd * n + b)] * inv_n
    });
    ChoiMatrix { hdim: n, matrix: out }
}

/// Inverse of [`choi`].
pub fn superop_from_choi(cm: &ChoiMatrix) -> SuperOperator {
    let n = cm.hdim();
    let d = n * n;
    let m = cm.matrix();
    let out = CMat::from_fn(d, d, |row, col| {
        // row = cc*n + a, col = dd*n + b
        let (cc, a) = (row / n, row % n);
        let (dd, b) = (col / n, col % n);
        m[(a * n + b, cc * n + dd)] * n as f64
    });
    SuperOperator::from_parts(n, out)
}

/// `(K ⊗ id)|Ω⟩` for an operator `K`: its row-major flattening over `√N`.
pub fn kraus_vector(k: &OperatorMatrix) -> CVec {
    let n = k.dim();
    let s = 1.0 / (n as f64).sqrt();
    CVec::from_fn(n * n, |idx, _| k.matrix()[(idx / n, idx % n)] * s)
}

/// Inverse of [`kraus_vector`].
pub fn operator_from_kraus_vector(v: &CVec, n: usize) -> OperatorMatrix {
    let s = (n as f64).sqrt();
    OperatorMatrix(CMat::from_fn(n, n, |a, b| v[a * n + b] * s))
}

/// Choi matrix of `ρ ↦ Σ_k K_k ρ K_k†`.
pub fn choi_from_kraus(ops: &[OperatorMatrix], n: usize) -> ChoiMatrix {
    let mut m = CMat::zeros(n * n, n * n);
    for k in ops {
        let v = kraus_vector(k);
        m += &v * v.adjoint();
    }
    ChoiMatrix { hdim: n, matrix: m }
}

/// Operators `K_i` with `Σ_i (K_i ⊗ id)|Ω⟩⟨Ω|(K_i ⊗ id)† = C`.
///
/// Eigenvalues down to `−tol` are clipped to zero; the returned list has one
/// operator per eigenvalue above `tol`.
pub fn kraus_vectors_from_choi(cm: &ChoiMatrix, tol: f64) -> Result<Vec<OperatorMatrix>> {
    let n = cm.hdim();
    let (vals, vecs) = linalg::hermitian_eigen(cm.matrix());
    if let Some(&lo) = vals.first() {
        if lo < -tol {
            return Err(Error::NotPositive(lo));
        }
    }
    let mut ops = Vec::new();
    // largest weight first
    for k in (0..vals.len()).rev() {
        if vals[k] > tol {
            let v: CVec = vecs.column(k) * c(vals[k].sqrt(), 0.0);
            ops.push(operator_from_kraus_vector(&v, n));
        }
    }
    Ok(ops)
}

pub fn matrix_exp(s: &SuperOperator, t: f64) -> SuperOperator {
    SuperOperator::from_parts(s.hdim(), linalg::matrix_exp(&s.matrix().scale(t)))
}

/// `‖vec(1)† P − vec(1)†‖_∞`.
pub fn trace_preservation_residual(p: &SuperOperator) -> f64 {
    let id = vectorize(&OperatorMatrix::identity(p.hdim()));
    let row = id.adjoint() * p.matrix();
    row.iter()
        .zip(id.iter())
        .map(|(x, y)| (x - y.conj()).norm())
        .fold(0.0, f64::max)
}

/// `‖vec(1)† S‖_∞`; zero for a generator of trace-preserving evolution.
pub fn trace_annihilation_residual(s: &SuperOperator) -> f64 {
    let id = vectorize(&OperatorMatrix::identity(s.hdim()));
    (id.adjoint() * s.matrix()).iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn is_trace_preserving(p: &SuperOperator, tol: f64) -> bool {
    trace_preservation_residual(p) <= tol
}

/// Returns whether every Choi eigenvalue is `≥ −tol`, together with the
/// smallest one.
pub fn is_completely_positive(p: &SuperOperator, tol: f64) -> (bool, f64) {
    let lo = choi(p).eigenvalues()[0];
    (lo >= -tol, lo)
}

pub fn hermiticity_preservation_residual(s: &SuperOperator) -> f64 {
    choi(s).hermiticity_residual()
}

pub fn is_hermiticity_preserving(s: &SuperOperator, tol: f64) -> bool {
    let cm = choi(s);
    cm.hermiticity_residual() <= tol * linalg::frob(cm.matrix()).max(1.0)
}

/// Conditional complete positivity: `Π C Π ≥ −tol` on the range of
/// `Π = 1 − |Ω⟩⟨Ω|`. Returns the verdict and the smallest eigenvalue of the
/// projected block.
pub fn is_ccp(s: &SuperOperator, tol: f64) -> Result<(bool, f64)> {
    let cm = choi(s);
    let res = cm.hermiticity_residual();
    if res > tol * linalg::frob(cm.matrix()).max(1.0) {
        return Err(Error::NotHermiticityPreserving(res));
    }
    let lo = linalg::min_hermitian_eigenvalue(&cm.projected_block());
    Ok((lo >= -tol, lo))
}

/// Generator of a Lindblad semigroup: Hermiticity preserving, trace
/// annihilating and conditionally completely positive, all within `tol`.
pub fn is_lindblad_form(s: &SuperOperator, tol: f64) -> bool {
    trace_annihilation_residual(s) <= tol * s.norm().max(1.0) && matches!(is_ccp(s, tol), Ok((true, _)))
}

/// The antilinear involution `vec(X) ↦ vec(X†)`.
pub fn adjoint_involution(v: &CVec, n: usize) -> CVec {
    CVec::from_fn(n * n, |idx, _| {
        let (j, i) = (idx / n, idx % n);
        v[i * n + j].conj()
    })
}

/// Serializable view of an operator: row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorRecord {
    pub dim: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl From<&OperatorMatrix> for OperatorRecord {
    fn from(op: &OperatorMatrix) -> Self {
        let n = op.dim();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let z = op.matrix()[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        Self { dim: n, rows }
    }
}
