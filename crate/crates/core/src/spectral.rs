//! Spectral decomposition of Hermiticity-preserving maps and the branches of
//! their logarithm.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, C64, I, ZERO};
use crate::superop::{adjoint_involution, SuperOperator};

#[derive(Debug, Clone, Copy)]
pub struct SpectralOptions {
    /// Eigenvalues closer than this are treated as conjugate partners, and
    /// negative real eigenvalues closer than this are paired at angle ±π.
    pub pair_tol: f64,
    /// Relative gap below which eigenvalues form one degenerate cluster.
    pub cluster_tol: f64,
    /// Largest accepted condition number of the right-eigenvector matrix.
    pub max_condition: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            pair_tol: 1e-8,
            cluster_tol: 1e-8,
            max_condition: 1e8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenKind {
    /// The stationary eigenvalue 1.
    Unit,
    /// A positive real eigenvalue other than the unit one.
    Real,
    /// Member of conjugate pair `pair`; `upper` marks the member carrying
    /// `+2πi x` in a branch (positive imaginary part, or angle +π).
    Pair { pair: usize, upper: bool },
    /// A negative real eigenvalue of odd multiplicity: no Hermiticity
    /// preserving logarithm exists.
    UnpairedNegative,
}

/// `P = Σ_a λ_a M_a` with biorthonormal spectral projectors `M_a`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    hdim: usize,
    eigenvalues: Vec<C64>,
    projectors: Vec<SuperOperator>,
    kinds: Vec<EigenKind>,
    /// `(upper, lower)` component indices of every conjugate pair.
    pairs: Vec<(usize, usize)>,
    /// Which pairs were formed from a degenerate negative real eigenvalue.
    negative_pairs: Vec<bool>,
    condition: f64,
}

impl SpectralDecomposition {
    pub fn hdim(&self) -> usize {
        self.hdim
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[SuperOperator] {
        &self.projectors
    }

    pub fn kinds(&self) -> &[EigenKind] {
        &self.kinds
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn n_c(&self) -> usize {
        self.pairs.len()
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn has_negative_pair(&self) -> bool {
        self.negative_pairs.iter().any(|&b| b)
    }

    pub fn unit_index(&self) -> Option<usize> {
        self.kinds.iter().position(|k| *k == EigenKind::Unit)
    }

    pub fn unpaired_negative(&self) -> Option<f64> {
        self.kinds
            .iter()
            .position(|k| *k == EigenKind::UnpairedNegative)
            .map(|a| self.eigenvalues[a].re)
    }

    /// Rank of projector `a`.
    pub fn multiplicity(&self, a: usize) -> usize {
        self.projectors[a].matrix().trace().re.round() as usize
    }

    /// `Σ_a f(λ_a) M_a`.
    pub fn apply_function(&self, mut f: impl FnMut(usize, C64) -> C64) -> SuperOperator {
        let mut acc = SuperOperator::zeros(self.hdim);
        for (a, (&lam, m)) in self.eigenvalues.iter().zip(&self.projectors).enumerate() {
            acc = &acc + &m.scale_complex(f(a, lam));
        }
        acc
    }

    pub fn reconstruct(&self) -> SuperOperator {
        self.apply_function(|_, lam| lam)
    }

    /// Permutes the pair labels (`new pair k = old pair order[k]`).
    pub fn relabel_pairs(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.pairs.len());
        let mut out = self.clone();
        out.pairs = order.iter().map(|&k| self.pairs[k]).collect();
        out.negative_pairs = order.iter().map(|&k| self.negative_pairs[k]).collect();
        for (new, &(up, lo)) in out.pairs.iter().enumerate() {
            out.kinds[up] = EigenKind::Pair { pair: new, upper: true };
            out.kinds[lo] = EigenKind::Pair {
                pair: new,
                upper: false,
            };
        }
        out
    }
}

/// Principal-branch logarithm of every eigenvalue, with conjugate partners
/// receiving conjugate values and the members of a negative pair receiving
/// `±iπ`.
pub fn principal_logs(dec: &SpectralDecomposition) -> Result<Vec<C64>> {
    if let Some(v) = dec.unpaired_negative() {
        return Err(Error::UnpairedNegativeEigenvalue(v));
    }
    let mut logs = vec![ZERO; dec.len()];
    for (a, &lam) in dec.eigenvalues.iter().enumerate() {
        if lam.norm() < 1e-12 {
            return Err(Error::ZeroEigenvalue(lam.norm()));
        }
        match dec.kinds[a] {
            EigenKind::Unit | EigenKind::Real => logs[a] = c(lam.re.ln(), 0.0),
            EigenKind::Pair { pair, upper: true } => {
                let lower = dec.pairs[pair].1;
                let angle = if dec.negative_pairs[pair] {
                    PI
                } else {
                    lam.im.atan2(lam.re).abs()
                };
                let l = c(lam.norm().ln(), angle);
                logs[a] = l;
                logs[lower] = l.conj();
            }
            EigenKind::Pair { upper: false, .. } => {}
            EigenKind::UnpairedNegative => unreachable!(),
        }
    }
    Ok(logs)
}

/// Branch `S_x = (1/T)[Σ_a Log(λ_a) M_a + Σ_c 2πi x_c (M_c − M_c̄)]` of
/// `(1/T) log P`.
pub fn branch_generator(dec: &SpectralDecomposition, x: &[i64], period: f64) -> Result<SuperOperator> {
    if x.len() != dec.n_c() {
        return Err(Error::DimensionMismatch {
            expected: dec.n_c(),
            found: x.len(),
        });
    }
    let mut logs = principal_logs(dec)?;
    for (k, &(up, lo)) in dec.pairs.iter().enumerate() {
        let shift = I * (2.0 * PI * x[k] as f64);
        logs[up] += shift;
        logs[lo] -= shift;
    }
    Ok(dec.apply_function(|a, _| logs[a]).scale(1.0 / period))
}

/// `(2πi/T)(M_c − M_c̄)` for pair `k`: the change of `S_x` per unit of `x_k`.
pub fn pair_direction(dec: &SpectralDecomposition, k: usize, period: f64) -> SuperOperator {
    let (up, lo) = dec.pairs[k];
    (&dec.projectors[up] - &dec.projectors[lo]).scale_complex(I * (2.0 * PI / period))
}

struct Component {
    value: C64,
    proj: CMat,
    rank: usize,
}

pub fn spectral_decompose(p: &SuperOperator, opts: &SpectralOptions) -> Result<SpectralDecomposition> {
    let n = p.hdim();
    let es = linalg::eigen_general(p.matrix(), opts.cluster_tol, opts.max_condition)?;

    // one component per near-degenerate cluster
    let nclusters = es.cluster.iter().copied().max().map_or(0, |m| m + 1);
    let mut comps: Vec<Component> = (0..nclusters)
        .map(|cl| {
            let members: Vec<usize> = (0..es.values.len()).filter(|&k| es.cluster[k] == cl).collect();
            let mut proj = CMat::zeros(n * n, n * n);
            let mut value = ZERO;
            for &k in &members {
                proj += es.right.column(k) * es.left.row(k);
                value += es.values[k];
            }
            Component {
                value: value / members.len() as f64,
                proj,
                rank: members.len(),
            }
        })
        .collect();

    // merge negative real clusters that agree within pair_tol
    let is_neg_real = |z: C64| z.im.abs() <= opts.pair_tol && z.re < 0.0;
    let mut i = 0;
    while i < comps.len() {
        if is_neg_real(comps[i].value) {
            let mut j = i + 1;
            while j < comps.len() {
                if is_neg_real(comps[j].value) && (comps[j].value - comps[i].value).norm() <= opts.pair_tol {
                    let other = comps.remove(j);
                    let (ri, rj) = (comps[i].rank as f64, other.rank as f64);
                    comps[i].value = (comps[i].value * ri + other.value * rj) / (ri + rj);
                    comps[i].proj += other.proj;
                    comps[i].rank += other.rank;
                } else {
                    j += 1;
                }
            }
        }
        i += 1;
    }

    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    let mut kinds = Vec::new();
    let mut uppers: Vec<(usize, bool)> = Vec::new(); // (index, negative pair)
    let mut lowers_of: Vec<usize> = Vec::new();

    // unit eigenvalue: the real component closest to 1
    let unit = comps
        .iter()
        .enumerate()
        .filter(|(_, cm)| (cm.value - c(1.0, 0.0)).norm() < 1e-6)
        .min_by(|a, b| (a.1.value - 1.0).norm().total_cmp(&(b.1.value - 1.0).norm()))
        .map(|(k, _)| k);

    let mut used = vec![false; comps.len()];
    let push = |value: C64,
                proj: CMat,
                kind: EigenKind,
                ev: &mut Vec<C64>,
                pr: &mut Vec<SuperOperator>,
                kd: &mut Vec<EigenKind>| {
        ev.push(value);
        pr.push(SuperOperator::from_parts(n, proj));
        kd.push(kind);
        ev.len() - 1
    };

    for k in 0..comps.len() {
        if used[k] {
            continue;
        }
        let v = comps[k].value;
        if Some(k) == unit {
            used[k] = true;
            push(
                c(v.re, 0.0),
                comps[k].proj.clone(),
                EigenKind::Unit,
                &mut eigenvalues,
                &mut projectors,
                &mut kinds,
            );
        } else if v.im.abs() > opts.pair_tol {
            // conjugate partner: nearest unused component to conj(v)
            let partner = (0..comps.len())
                .filter(|&j| j != k && !used[j])
                .min_by(|&a, &b| {
                    (comps[a].value - v.conj())
                        .norm()
                        .total_cmp(&(comps[b].value - v.conj()).norm())
                })
                .filter(|&j| (comps[j].value - v.conj()).norm() <= opts.pair_tol.max(1e-8 * v.norm()));
            let Some(j) = partner else {
                return Err(Error::UnpairedComplexEigenvalue { re: v.re, im: v.im });
            };
            used[k] = true;
            used[j] = true;
            let (up, lo) = if v.im > 0.0 { (k, j) } else { (j, k) };
            let mean = (comps[up].value + comps[lo].value.conj()) * 0.5;
            let iu = push(
                mean,
                comps[up].proj.clone(),
                EigenKind::Real,
                &mut eigenvalues,
                &mut projectors,
                &mut kinds,
            );
            let il = push(
                mean.conj(),
                comps[lo].proj.clone(),
                EigenKind::Real,
                &mut eigenvalues,
                &mut projectors,
                &mut kinds,
            );
            uppers.push((iu, false));
            lowers_of.push(il);
        } else if v.re < 0.0 {
            used[k] = true;
            let rank = comps[k].rank;
            let val = c(v.re, 0.0);
            if rank % 2 == 1 {
                push(
                    val,
                    comps[k].proj.clone(),
                    EigenKind::UnpairedNegative,
                    &mut eigenvalues,
                    &mut projectors,
                    &mut kinds,
                );
            } else {
                for (pu, pl) in split_negative_cluster(&comps[k].proj, n, rank) {
                    let iu = push(val, pu, EigenKind::Real, &mut eigenvalues, &mut projectors, &mut kinds);
                    let il = push(val, pl, EigenKind::Real, &mut eigenvalues, &mut projectors, &mut kinds);
                    uppers.push((iu, true));
                    lowers_of.push(il);
                }
            }
        } else {
            used[k] = true;
            push(
                c(v.re, 0.0),
                comps[k].proj.clone(),
                EigenKind::Real,
                &mut eigenvalues,
                &mut projectors,
                &mut kinds,
            );
        }
    }

    // order pairs by angle, then modulus, for a deterministic labelling
    let mut order: Vec<usize> = (0..uppers.len()).collect();
    let key = |k: usize| {
        let z = eigenvalues[uppers[k].0];
        (if uppers[k].1 { PI } else { z.im.atan2(z.re) }, z.norm())
    };
    order.sort_by(|&a, &b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    let mut pairs = Vec::new();
    let mut negative_pairs = Vec::new();
    for (label, &k) in order.iter().enumerate() {
        let (up, neg) = uppers[k];
        let lo = lowers_of[k];
        kinds[up] = EigenKind::Pair {
            pair: label,
            upper: true,
        };
        kinds[lo] = EigenKind::Pair {
            pair: label,
            upper: false,
        };
        pairs.push((up, lo));
        negative_pairs.push(neg);
    }

    let dec = SpectralDecomposition {
        hdim: n,
        eigenvalues,
        projectors,
        kinds,
        pairs,
        negative_pairs,
        condition: es.condition,
    };
    let residual = dec.reconstruct().distance(p);
    if residual > 1e-8 * p.norm().max(1.0) {
        return Err(Error::DefectiveMap(es.condition.max(residual / f64::EPSILON)));
    }
    Ok(dec)
}

/// Splits the projector onto a degenerate negative eigenspace (even rank
/// `2k`) into `k` conjugate pairs `(M_c, M_c̄)` swapped by `X ↦ X†`.
///
/// The range is spanned by Hermitian operators; an orthonormal Hermitian
/// basis `e_1..e_2k` gives the complex vectors `(e_{2j−1} ± i e_{2j})/√2`.
fn split_negative_cluster(proj: &CMat, n: usize, rank: usize) -> Vec<(CMat, CMat)> {
    let d = n * n;
    // Hermitian spanning set of the range
    let mut cands: Vec<CVec> = Vec::with_capacity(2 * d);
    for j in 0..d {
        let v: CVec = proj.column(j).into_owned();
        let jv = adjoint_involution(&v, n);
        cands.push((&v + &jv) * c(0.5, 0.0));
        cands.push((&v - &jv) * c(0.0, -0.5));
    }
    // pivoted Gram-Schmidt under the (real on this set) Hilbert-Schmidt product
    let mut basis: Vec<CVec> = Vec::with_capacity(rank);
    while basis.len() < rank {
        let (best, norm) = cands
            .iter()
            .enumerate()
            .map(|(k, v)| (k, v.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty candidate set");
        if norm < 1e-12 {
            break;
        }
        let e: CVec = cands.swap_remove(best) / c(norm, 0.0);
        for v in cands.iter_mut() {
            let ov = c(e.dotc(v).re, 0.0);
            *v -= &e * ov;
        }
        basis.push(e);
    }
    let k = basis.len() / 2;
    let s = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut w = CMat::zeros(d, 2 * k);
    for j in 0..k {
        let up = (&basis[2 * j] + &basis[2 * j + 1] * I) * s;
        let lo = (&basis[2 * j] - &basis[2 * j + 1] * I) * s;
        w.set_column(j, &up);
        w.set_column(k + j, &lo);
    }
    // proj = W Y with Y = W† proj since W has orthonormal columns
    let y = w.adjoint() * proj;
    (0..k)
        .map(|j| {
            let pu = w.column(j) * y.row(j);
            let pl = w.column(k + j) * y.row(k + j);
            (pu, pl)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superop::{is_hermiticity_preserving, lindbladian_matrix, matrix_exp, OperatorMatrix};

    fn diag_map(vals: &[f64]) -> SuperOperator {
        let v = CVec::from_iterator(vals.len(), vals.iter().map(|&x| c(x, 0.0)));
        SuperOperator::new(2, CMat::from_diagonal(&v)).unwrap()
    }

    fn damped_qubit(gamma: f64) -> SuperOperator {
        let h = OperatorMatrix::pauli_z().scale(c(0.5, 0.0));
        let a = OperatorMatrix::sigma_minus().scale(c(gamma.sqrt(), 0.0));
        lindbladian_matrix(&h, &[a]).unwrap()
    }

    #[test]
    fn diagonal_map_has_no_pairs() {
        let dec = spectral_decompose(&diag_map(&[1.0, 0.5, 0.3, 0.2]), &SpectralOptions::default()).unwrap();
        assert_eq!(dec.n_c(), 0);
        assert_eq!(dec.unit_index(), Some(0));
    }

    #[test]
    fn unpaired_negative_is_tagged() {
        let dec = spectral_decompose(&diag_map(&[1.0, -0.3, 0.5, 0.2]), &SpectralOptions::default()).unwrap();
        assert_eq!(dec.unpaired_negative(), Some(-0.3));
        assert!(matches!(
            branch_generator(&dec, &[], 1.0),
            Err(Error::UnpairedNegativeEigenvalue(_))
        ));
    }

    #[test]
    fn degenerate_negative_pair_is_paired() {
        let dec = spectral_decompose(&diag_map(&[1.0, -0.3, -0.3, 0.2]), &SpectralOptions::default()).unwrap();
        assert_eq!(dec.n_c(), 1);
        assert!(dec.has_negative_pair());
        let s = branch_generator(&dec, &[0], 2.0).unwrap();
        assert!(matrix_exp(&s, 2.0).distance(&diag_map(&[1.0, -0.3, -0.3, 0.2])) < 1e-12);
    }

    #[test]
    fn undriven_qubit_spectrum_classification() {
        let gamma = 0.01;
        let t = 2.0 * PI / 1.7;
        let p = matrix_exp(&damped_qubit(gamma), t);
        let dec = spectral_decompose(&p, &SpectralOptions::default()).unwrap();
        assert_eq!(dec.n_c(), 1);
        assert!(dec.unit_index().is_some());
        let reals = dec.kinds().iter().filter(|k| **k == EigenKind::Real).count();
        assert_eq!(reals, 1);
        let eye = dec.apply_function(|_, _| c(1.0, 0.0));
        assert!(eye.distance(&SuperOperator::identity(2)) < 1e-8);
        assert!(dec.reconstruct().distance(&p) < 1e-8);
    }

    #[test]
    fn principal_branch_recovers_generator() {
        let l = damped_qubit(0.01);
        let t = 2.0 * PI / 3.0;
        let dec = spectral_decompose(&matrix_exp(&l, t), &SpectralOptions::default()).unwrap();
        let s0 = branch_generator(&dec, &[0], t).unwrap();
        assert!(s0.distance(&l) < 1e-8);
    }

    #[test]
    fn undriven_at_half_period_resonance_uses_negative_pair() {
        // T = π puts the coherence eigenvalues exactly on the negative axis
        let l = damped_qubit(0.01);
        let t = PI;
        let dec = spectral_decompose(&matrix_exp(&l, t), &SpectralOptions::default()).unwrap();
        assert!(dec.has_negative_pair());
        let s = branch_generator(&dec, &[0], t).unwrap();
        assert!(is_hermiticity_preserving(&s, 1e-9));
        let alt = branch_generator(&dec, &[-1], t).unwrap();
        assert!(s.distance(&l).min(alt.distance(&l)) < 1e-8);
    }

    #[test]
    fn branches_reconstruct_the_map() {
        let l = damped_qubit(0.05);
        let t = 2.0 * PI / 0.7;
        let p = matrix_exp(&l, t);
        let dec = spectral_decompose(&p, &SpectralOptions::default()).unwrap();
        for x in -5..=5 {
            let s = branch_generator(&dec, &[x], t).unwrap();
            assert!(matrix_exp(&s, t).distance(&p) < 1e-8 * p.norm());
            assert!(is_hermiticity_preserving(&s, 1e-9));
        }
    }

    #[test]
    fn wrong_branch_length_is_rejected() {
        let dec = spectral_decompose(&matrix_exp(&damped_qubit(0.1), 1.0), &SpectralOptions::default()).unwrap();
        assert!(branch_generator(&dec, &[0, 0], 1.0).is_err());
    }
}
