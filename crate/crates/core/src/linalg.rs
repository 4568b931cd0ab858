//! Dense complex linear algebra shared by the superoperator machinery.
//!
//! Everything here works on `DMatrix<Complex64>`; the matrices of interest are
//! small (N² × N² with N = 2 for the shipped model), so clarity wins over
//! blocking or workspace reuse.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frob_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Hermitian part `(m + m†)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix (the anti-Hermitian part is
/// discarded). Eigenvalues ascending, eigenvectors as matching columns.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = hermitian_part(m);
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = hermitian_part(m);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_hermitian_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// Trace norm of a Hermitian matrix.
pub fn hermitian_trace_norm(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum()
}

pub fn matrix_exp(m: &CMat) -> CMat {
    m.exp()
}

/// Right eigenvectors and their biorthonormal left duals of a general complex
/// matrix, obtained from its Schur form.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<C64>,
    /// Columns are unit-norm right eigenvectors.
    pub right: CMat,
    /// Rows are left eigenvectors with `left * right = 1`.
    pub left: CMat,
    /// Cluster label of every eigenvalue; equal labels mark a near-degenerate block.
    pub cluster: Vec<usize>,
    pub condition: f64,
}

/// Groups indices whose values lie within `tol` of each other (transitively).
pub fn cluster_values(values: &[C64], tol: f64) -> Vec<usize> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (root(&mut label, i), root(&mut label, j));
                if ri != rj {
                    label[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    // compact labels in order of first appearance
    let mut map = vec![usize::MAX; n];
    let mut next = 0;
    let mut out = vec![0; n];
    for i in 0..n {
        let r = root(&mut label, i);
        if map[r] == usize::MAX {
            map[r] = next;
            next += 1;
        }
        out[i] = map[r];
    }
    out
}

/// Eigen-decomposition of a diagonalizable complex matrix.
///
/// Eigenvalues come from the complex Schur form `A = Q T Q†`; eigenvectors of
/// `T` are obtained by back substitution, skipping couplings inside a
/// near-degenerate cluster (relative gap below `cluster_tol`), and the left
/// eigenvectors are the rows of the inverse of the right-eigenvector matrix.
pub fn eigen_general(a: &CMat, cluster_tol: f64, max_condition: f64) -> Result<EigenSystem> {
    let n = a.nrows();
    let scale = frob(a).max(f64::MIN_POSITIVE);
    let schur = Schur::try_new(a.clone(), 1e-15, 10_000).ok_or_else(|| Error::DefectiveMap(f64::INFINITY))?;
    let (q, t) = schur.unpack();
    let values: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let radius = values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let cluster = cluster_values(&values, cluster_tol * radius);

    let mut y = CMat::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut rhs = ZERO;
            for j in (i + 1)..=k {
                rhs -= t[(i, j)] * y[(j, k)];
            }
            if cluster[i] == cluster[k] {
                // inside a degenerate block the coupling must vanish for a
                // diagonalizable map; a large residual is caught by the
                // condition / reconstruction checks downstream
                y[(i, k)] = ZERO;
            } else {
                let mut denom = t[(i, i)] - t[(k, k)];
                if denom.norm() < f64::EPSILON * scale {
                    denom = C64::new(f64::EPSILON * scale, 0.0);
                }
                y[(i, k)] = rhs / denom;
            }
        }
    }
    let mut right = &q * y;
    for k in 0..n {
        let nrm = right.column(k).norm();
        right.column_mut(k).unscale_mut(nrm);
    }
    let svd = right.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < max_condition) {
        return Err(Error::DefectiveMap(condition));
    }
    let left = right.clone().try_inverse().ok_or(Error::DefectiveMap(f64::INFINITY))?;
    Ok(EigenSystem {
        values,
        right,
        left,
        cluster,
        condition,
    })
}

/// Orthonormal basis (as columns) of the orthogonal complement of the unit
/// vector `v`, from the Householder reflection that maps `e_0` onto `v`.
pub fn complement_basis(v: &CVec) -> CMat {
    let n = v.len();
    let mut u = v.clone();
    // choose the phase so that the reflection is well conditioned
    let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { ONE };
    u[0] += phase;
    let unorm2 = u.norm_squared();
    let mut h = CMat::identity(n, n);
    if unorm2 > 0.0 {
        h -= (&u * u.adjoint()).scale(2.0 / unorm2);
    }
    h.columns(1, n - 1).into_owned()
}
