//! Existence of a Floquet Lindbladian, distance-from-Markovianity measures and
//! extraction of the effective Hamiltonian and jump operators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::spectral::{branch_generator, pair_direction, spectral_decompose, SpectralDecomposition, SpectralOptions};
use crate::superop::{
    choi, kraus_vectors_from_choi, lindbladian_matrix, maximally_entangled, operator_from_kraus_vector,
    trace_annihilation_residual, ChoiMatrix, OperatorMatrix, SuperOperator,
};

/// Default half-width of the integer branch box.
pub const DEFAULT_X_MAX: i64 = 20;
/// `V_Σ(x) ≥ −FEASIBILITY_TOL` counts as positive semidefinite.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Reported d_RHP values below this are set to zero.
pub const D_RHP_FLOOR: f64 = 1e-7;
pub const DEFAULT_EPS_LADDER: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// Integer shift `x_c` of the logarithm for every conjugate pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchIndex {
    pub x: Vec<i64>,
}

impl BranchIndex {
    pub fn principal(n_c: usize) -> Self {
        Self { x: vec![0; n_c] }
    }

    pub fn sup_norm(&self) -> i64 {
        self.x.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

impl std::fmt::Display for BranchIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.x.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Linear matrix inequality `V_Σ(x) = V_0 + Σ_c x_c V_c ≥ 0` on the range of
/// `Π = 1 − |Ω⟩⟨Ω|`, expressed in an orthonormal basis of that range.
#[derive(Debug, Clone)]
pub struct SpectrahedronProblem {
    pub v0: CMat,
    pub vc: Vec<CMat>,
    hdim: usize,
}

impl SpectrahedronProblem {
    pub fn n_c(&self) -> usize {
        self.vc.len()
    }

    /// `V_Σ(x)` for real coordinates.
    pub fn at(&self, x: &[f64]) -> CMat {
        assert_eq!(x.len(), self.vc.len(), "branch dimension");
        let mut m = self.v0.clone();
        for (v, &xc) in self.vc.iter().zip(x) {
            m += v.scale(xc);
        }
        m
    }

    pub fn min_eigenvalue(&self, x: &[f64]) -> f64 {
        linalg::min_hermitian_eigenvalue(&self.at(x))
    }

    /// Depolarizing rate `μ(x) = N²·max(0, −λ_min(V_Σ(x)))` that makes the
    /// branch conditionally completely positive.
    pub fn mu(&self, x: &[f64]) -> f64 {
        let n2 = (self.hdim * self.hdim) as f64;
        n2 * (-self.min_eigenvalue(x)).max(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct MarkovReport {
    /// Condition (i): no unpaired negative real eigenvalue.
    pub hermiticity_ok: bool,
    pub exists: bool,
    /// Valid branch when `exists`, else the branch minimising `μ`.
    pub best_branch: Option<BranchIndex>,
    pub mu_min: f64,
    pub d_rhp: f64,
    pub floquet_lindbladian: Option<SuperOperator>,
    pub h_f: Option<OperatorMatrix>,
    pub jumps_f: Option<Vec<OperatorMatrix>>,
    pub n_c: usize,
    pub negative_pair: bool,
    pub x_max: i64,
    /// The minimising branch sits on the boundary of the search box, so a
    /// better branch may exist outside it.
    pub bound_exceeded: bool,
}

/// True iff the decomposition has no unpaired negative real eigenvalue and no
/// vanishing eigenvalue, i.e. a Hermiticity-preserving logarithm exists.
pub fn check_condition_i(dec: &SpectralDecomposition) -> bool {
    dec.unpaired_negative().is_none() && dec.eigenvalues().iter().all(|l| l.norm() >= 1e-12)
}

fn projected(s: &SuperOperator) -> CMat {
    linalg::hermitian_part(&choi(s).projected_block())
}

pub fn build_spectrahedron(dec: &SpectralDecomposition, period: f64) -> Result<SpectrahedronProblem> {
    let s0 = branch_generator(dec, &vec![0; dec.n_c()], period)?;
    let vc = (0..dec.n_c())
        .map(|k| projected(&pair_direction(dec, k, period)))
        .collect();
    Ok(SpectrahedronProblem {
        v0: projected(&s0),
        vc,
        hdim: dec.hdim(),
    })
}

/// All integer points of the box `|x_c| ≤ x_max`, ordered by `‖x‖∞` and then
/// lexicographically.
fn box_points(n_c: usize, x_max: i64) -> Result<Vec<Vec<i64>>> {
    let width = (2 * x_max + 1) as f64;
    if x_max < 0 || width.powi(n_c as i32) > 5e6 {
        return Err(Error::InvalidParams(format!(
            "branch box with n_c = {n_c}, x_max = {x_max} is too large"
        )));
    }
    let mut pts: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..n_c {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                (-x_max..=x_max).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    pts.sort_by(|a, b| {
        let na = a.iter().map(|v| v.abs()).max().unwrap_or(0);
        let nb = b.iter().map(|v| v.abs()).max().unwrap_or(0);
        na.cmp(&nb).then_with(|| a.cmp(b))
    });
    Ok(pts)
}

struct BranchScan {
    /// First feasible point in search order.
    feasible: Option<Vec<i64>>,
    /// Point of smallest `μ` (first in search order on ties).
    argmin: Vec<i64>,
    mu: f64,
}

fn scan_branches(prob: &SpectrahedronProblem, x_max: i64) -> Result<BranchScan> {
    let mut feasible = None;
    let mut best: Option<(Vec<i64>, f64)> = None;
    for x in box_points(prob.n_c(), x_max)? {
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let lo = prob.min_eigenvalue(&xf);
        if feasible.is_none() && lo >= -FEASIBILITY_TOL {
            feasible = Some(x.clone());
        }
        let mu = prob.mu(&xf);
        if best.as_ref().map_or(true, |(_, m)| mu < *m) {
            best = Some((x, mu));
        }
    }
    let (argmin, mu) = best.expect("box contains the origin");
    Ok(BranchScan { feasible, argmin, mu })
}

/// Smallest depolarizing rate over the branch box and the branch attaining it.
pub fn mu_min(dec: &SpectralDecomposition, period: f64, x_max: i64) -> Result<(f64, BranchIndex)> {
    if let Some(v) = dec.unpaired_negative() {
        return Err(Error::UnpairedNegativeEigenvalue(v));
    }
    let prob = build_spectrahedron(dec, period)?;
    let scan = scan_branches(&prob, x_max)?;
    Ok((scan.mu, BranchIndex { x: scan.argmin }))
}

/// `μ` of a single branch.
pub fn mu_for_branch(dec: &SpectralDecomposition, period: f64, x: &BranchIndex) -> Result<f64> {
    let prob = build_spectrahedron(dec, period)?;
    if x.x.len() != prob.n_c() {
        return Err(Error::DimensionMismatch {
            expected: prob.n_c(),
            found: x.x.len(),
        });
    }
    let xf: Vec<f64> = x.x.iter().map(|&v| v as f64).collect();
    Ok(prob.mu(&xf))
}

/// `Ω`-adapted blocks of `choi(S)`: `c₀₀ = ⟨Ω|C|Ω⟩`, `c = Q†C|Ω⟩`, `B = Q†CQ`
/// with `Q` an orthonormal basis of the complement of `|Ω⟩`.
struct RateBlocks {
    c00: f64,
    cc: CMat,
    b: CMat,
    trace: f64,
}

impl RateBlocks {
    fn new(s: &SuperOperator) -> Self {
        let cm = linalg::hermitian_part(choi(s).matrix());
        let omega = maximally_entangled(s.hdim());
        let q = linalg::complement_basis(&omega);
        let col = q.adjoint() * &cm * &omega;
        Self {
            c00: (omega.adjoint() * &cm * &omega)[(0, 0)].re,
            cc: &col * col.adjoint(),
            b: q.adjoint() * &cm * &q,
            trace: cm.trace().re,
        }
    }

    /// `(‖choi(1 + εS)‖₁ − 1)/ε` without cancellation. The eigenvalues of
    /// `|Ω⟩⟨Ω| + εC` near zero are `εν` with `ν` an eigenvalue of
    /// `B − ε ccᵀ/(1 + εc₀₀ − εν)`; the remaining one is fixed by the trace.
    fn rate(&self, eps: f64) -> f64 {
        let mut nu = linalg::hermitian_eigenvalues(&self.b);
        for i in 0..nu.len() {
            for _ in 0..50 {
                let denom = 1.0 + eps * (self.c00 - nu[i]);
                let m = &self.b - self.cc.scale(eps / denom);
                let next = linalg::hermitian_eigenvalues(&linalg::hermitian_part(&m))[i];
                let done = (next - nu[i]).abs() <= 1e-15 * (1.0 + next.abs());
                nu[i] = next;
                if done {
                    break;
                }
            }
        }
        self.trace + 2.0 * nu.iter().map(|v| (-v).max(0.0)).sum::<f64>()
    }
}

fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..(n - m) {
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    p[0]
}

/// Smallest ε the ladder may be extended to.
const D_RHP_MIN_EPS: f64 = 1e-15;

/// Growth rate `lim_{ε→0} (‖choi(1 + εS)‖₁ − 1)/ε`, estimated on the ladder
/// and extrapolated to `ε = 0` with the interpolating polynomial through all
/// ladder points (Neville). The rate has a kink wherever an eigenvalue of
/// `choi(1 + εS)` crosses zero; when the extrapolation is not stable the
/// ladder is extended by decades and the last `len` points are used, until
/// two successive estimates agree. Results below [`D_RHP_FLOOR`] are
/// reported as 0.
pub fn d_rhp(s: &SuperOperator, eps_ladder: &[f64]) -> f64 {
    assert!(!eps_ladder.is_empty(), "empty ladder");
    let blocks = RateBlocks::new(s);
    let len = eps_ladder.len();
    let mut xs = eps_ladder.to_vec();
    let mut ys: Vec<f64> = xs.iter().map(|&e| blocks.rate(e)).collect();
    let mut d = neville_at_zero(&xs, &ys);
    loop {
        let next_eps = xs[xs.len() - 1] / 10.0;
        if next_eps < D_RHP_MIN_EPS {
            break;
        }
        xs.push(next_eps);
        ys.push(blocks.rate(next_eps));
        let k = xs.len() - len;
        let next = neville_at_zero(&xs[k..], &ys[k..]);
        let agree = (next - d).abs() <= 1e-8 * next.abs() + 1e-14;
        d = next;
        if agree {
            break;
        }
    }
    if d < D_RHP_FLOOR {
        0.0
    } else {
        d
    }
}

fn precondition(l: &SuperOperator) -> Result<(ChoiMatrix, f64)> {
    let cm = choi(l);
    let scale = linalg::frob(cm.matrix()).max(1.0);
    let herm = cm.hermiticity_residual();
    if herm > 1e-9 * scale {
        return Err(Error::NotLindbladian(format!("Hermiticity residual {herm:.3e}")));
    }
    let tr = trace_annihilation_residual(l);
    if tr > 1e-9 * l.norm().max(1.0) {
        return Err(Error::NotLindbladian(format!("trace annihilation residual {tr:.3e}")));
    }
    Ok((cm, scale))
}

/// Effective Hamiltonian (traceless) and jump operators (traceless) of a
/// Lindbladian.
///
/// With `|k⟩ = (K ⊗ 1)|Ω⟩` for `K = −iH − ½ΣA†A` and traceless jumps,
/// `choi(L) = |k⟩⟨Ω| + |Ω⟩⟨k| + Σ_i |a_i⟩⟨a_i|` where every `|a_i⟩ ⊥ |Ω⟩`.
/// `Π choi(L) |Ω⟩` therefore yields the traceless part of `K`, and the
/// projected block `Π choi(L) Π` the jumps.
pub fn extract_hamiltonian_jumps(l: &SuperOperator) -> Result<(OperatorMatrix, Vec<OperatorMatrix>)> {
    let n = l.hdim();
    let (cm, scale) = precondition(l)?;
    let omega = maximally_entangled(n);
    let d = n * n;
    let proj = CMat::identity(d, d) - &omega * omega.adjoint();
    let herm = linalg::hermitian_part(cm.matrix());

    let k_vec = &proj * &herm * &omega;
    let k0 = operator_from_kraus_vector(&k_vec, n);
    let anti = k0.matrix() - k0.matrix().adjoint();
    let h = OperatorMatrix::new(linalg::hermitian_part(&(anti * c(0.0, 0.5))))?;

    let phi = ChoiMatrix::from_matrix(n, linalg::hermitian_part(&(&proj * &herm * &proj)))?;
    let tol = 1e-9 * scale;
    let jumps = kraus_vectors_from_choi(&phi, tol).map_err(|e| match e {
        Error::NotPositive(v) => Error::NotLindbladian(format!("projected Choi eigenvalue {v:.3e}")),
        other => other,
    })?;

    let back = lindbladian_matrix(&h, &jumps)?;
    let res = back.distance(l);
    if res > 1e-6 * l.norm().max(1.0) {
        return Err(Error::ExtractionResidual(res));
    }
    Ok((h, jumps))
}

/// Decomposes `P` and runs [`find_floquet_lindbladian_from`].
pub fn find_floquet_lindbladian(p: &SuperOperator, period: f64, x_max: i64) -> Result<MarkovReport> {
    let dec = spectral_decompose(p, &SpectralOptions::default())?;
    find_floquet_lindbladian_from(&dec, period, x_max)
}

/// Searches the branch box for a conditionally completely positive branch
/// generator and fills in both distance measures.
pub fn find_floquet_lindbladian_from(dec: &SpectralDecomposition, period: f64, x_max: i64) -> Result<MarkovReport> {
    if !(period > 0.0) {
        return Err(Error::InvalidParams(format!("period {period} must be positive")));
    }
    let n_c = dec.n_c();
    let mut report = MarkovReport {
        hermiticity_ok: check_condition_i(dec),
        exists: false,
        best_branch: None,
        mu_min: f64::INFINITY,
        d_rhp: f64::INFINITY,
        floquet_lindbladian: None,
        h_f: None,
        jumps_f: None,
        n_c,
        negative_pair: dec.has_negative_pair(),
        x_max,
        bound_exceeded: false,
    };
    if !report.hermiticity_ok {
        return Ok(report);
    }
    let prob = build_spectrahedron(dec, period)?;
    let scan = scan_branches(&prob, x_max)?;
    report.bound_exceeded = scan.argmin.iter().any(|v| v.abs() == x_max) && scan.feasible.is_none();

    if let Some(x) = scan.feasible {
        let s = branch_generator(dec, &x, period)?;
        report.exists = true;
        report.mu_min = 0.0;
        report.d_rhp = d_rhp(&s, &DEFAULT_EPS_LADDER);
        if let Ok((h, jumps)) = extract_hamiltonian_jumps(&s) {
            report.h_f = Some(h);
            report.jumps_f = Some(jumps);
        }
        report.floquet_lindbladian = Some(s);
        report.best_branch = Some(BranchIndex { x });
    } else {
        let s = branch_generator(dec, &scan.argmin, period)?;
        report.mu_min = scan.mu;
        report.d_rhp = d_rhp(&s, &DEFAULT_EPS_LADDER);
        report.best_branch = Some(BranchIndex { x: scan.argmin });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CVec, C64};
    use crate::spectral::SpectralOptions;
    use crate::superop::{depolarizing_generator, is_ccp, SuperOperator};

    fn diag_map(vals: &[f64]) -> SuperOperator {
        let v: Vec<C64> = vals.iter().map(|&x| c(x, 0.0)).collect();
        SuperOperator::new(2, CMat::from_diagonal(&CVec::from_vec(v))).unwrap()
    }

    #[test]
    fn stable_rate_matches_direct_trace_norm() {
        // σ_x dephasing pushed out of the cone by a negative depolarizer
        let sx = OperatorMatrix::pauli_x();
        let l = lindbladian_matrix(&OperatorMatrix::pauli_z().scale(c(0.3, 0.0)), &[sx]).unwrap();
        let s = &l - &depolarizing_generator(2).scale(0.7);
        let blocks = RateBlocks::new(&s);
        for &eps in &[1e-1, 1e-2, 1e-3] {
            let p = &SuperOperator::identity(2) + &s.scale(eps);
            let direct = (linalg::hermitian_trace_norm(choi(&p).matrix()) - 1.0) / eps;
            assert!((blocks.rate(eps) - direct).abs() < 1e-10, "ε = {eps}");
        }
    }

    #[test]
    fn condition_i_on_diagonal_maps() {
        let opts = SpectralOptions::default();
        let unpaired = spectral_decompose(&diag_map(&[1.0, -0.3, 0.5, 0.2]), &opts).unwrap();
        assert!(!check_condition_i(&unpaired));
        let paired = spectral_decompose(&diag_map(&[1.0, -0.3, -0.3, 0.2]), &opts).unwrap();
        assert!(check_condition_i(&paired));
    }

    #[test]
    fn box_order() {
        let pts = box_points(1, 2).unwrap();
        assert_eq!(pts, vec![vec![0], vec![-1], vec![1], vec![-2], vec![2]]);
        let pts = box_points(2, 1).unwrap();
        assert_eq!(pts[0], vec![0, 0]);
        assert_eq!(pts[1], vec![-1, -1]);
        assert_eq!(pts.len(), 9);
        assert!(box_points(0, 20).unwrap() == vec![Vec::<i64>::new()]);
    }

    #[test]
    fn depolarizing_projected_choi_is_scaled_identity() {
        let n = 2;
        let v = projected(&depolarizing_generator(n));
        let expected = CMat::identity(3, 3).scale(1.0 / 4.0);
        assert!(linalg::frob_diff(&v, &expected) < 1e-14);
    }

    #[test]
    fn extraction_of_amplitude_damping() {
        let gamma: f64 = 0.3;
        let h = OperatorMatrix::pauli_z().scale(c(0.5, 0.0));
        let a = OperatorMatrix::sigma_minus().scale(c(gamma.sqrt(), 0.0));
        let l = lindbladian_matrix(&h, &[a]).unwrap();
        let (hf, jumps) = extract_hamiltonian_jumps(&l).unwrap();
        assert!(linalg::frob_diff(hf.matrix(), h.matrix()) < 1e-9);
        assert_eq!(jumps.len(), 1);
        let ada = &jumps[0].adjoint() * &jumps[0];
        let expected = (&OperatorMatrix::sigma_plus() * &OperatorMatrix::sigma_minus()).scale(c(gamma, 0.0));
        assert!(linalg::frob_diff(ada.matrix(), expected.matrix()) < 1e-9);
    }

    #[test]
    fn coherent_generator_has_no_jumps() {
        let h = OperatorMatrix::pauli_x().scale(c(0.7, 0.0));
        let l = lindbladian_matrix(&h, &[]).unwrap();
        let (hf, jumps) = extract_hamiltonian_jumps(&l).unwrap();
        assert!(jumps.is_empty());
        assert!(linalg::frob_diff(hf.matrix(), h.matrix()) < 1e-12);
    }

    #[test]
    fn extraction_rejects_non_lindbladian() {
        let l = depolarizing_generator(2).scale(-1.0);
        assert!(matches!(extract_hamiltonian_jumps(&l), Err(Error::NotLindbladian(_))));
    }

    #[test]
    fn d_rhp_of_lindbladian_is_zero() {
        let a = OperatorMatrix::sigma_minus().scale(c(0.2, 0.0));
        let l = lindbladian_matrix(&OperatorMatrix::pauli_z(), &[a]).unwrap();
        assert_eq!(d_rhp(&l, &DEFAULT_EPS_LADDER), 0.0);
    }

    #[test]
    fn d_rhp_of_negative_depolarizer() {
        // −N has Π choi Π = −Π/N²: three eigenvalues −1/4, so rate = 2·3/4
        let s = depolarizing_generator(2).scale(-1.0);
        assert!(is_ccp(&s, 1e-9).unwrap().0 == false);
        let d = d_rhp(&s, &DEFAULT_EPS_LADDER);
        assert!((d - 1.5).abs() < 1e-8, "{d}");
        assert!((d_rhp(&s.scale(2.0), &DEFAULT_EPS_LADDER) - 2.0 * d).abs() < 1e-8);
    }

    #[test]
    fn branch_display() {
        assert_eq!(BranchIndex { x: vec![1, -2] }.to_string(), "[1,-2]");
        assert_eq!(BranchIndex::principal(0).to_string(), "[]");
    }
}
