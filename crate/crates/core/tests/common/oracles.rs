//! Independent oracles shared by the property and acceptance suites.

use floquet_core::linalg::{c, complement_basis, CMat};
use floquet_core::superop::{
    choi, depolarizing_generator, lindbladian_matrix, maximally_entangled, OperatorMatrix, SuperOperator,
};
use rand::rngs::StdRng;
use rand::Rng;

fn random_operator(rng: &mut StdRng, scale: f64) -> CMat {
    CMat::from_fn(2, 2, |_, _| {
        c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
    })
}

fn traceless_hermitian(m: &CMat) -> CMat {
    let h = (m + m.adjoint()).scale(0.5);
    let tr = h.trace() / c(2.0, 0.0);
    h - CMat::identity(2, 2) * tr
}

/// Random Lindbladian with a traceless Hamiltonian and one to three traceless
/// jumps, the gauge in which extraction returns them.
pub fn random_lindbladian(rng: &mut StdRng) -> (CMat, SuperOperator) {
    let h = traceless_hermitian(&random_operator(rng, 1.0));
    let n_jumps = rng.gen_range(1..=3);
    let jumps: Vec<OperatorMatrix> = (0..n_jumps)
        .map(|_| {
            let a = random_operator(rng, 0.5);
            let tr = a.trace() / c(2.0, 0.0);
            OperatorMatrix::new(a - CMat::identity(2, 2) * tr).unwrap()
        })
        .collect();
    let l = lindbladian_matrix(&OperatorMatrix::new(h.clone()).unwrap(), &jumps).unwrap();
    (h, l)
}

/// Conditional complete positivity by attempted Cholesky factorisation of the
/// Choi matrix restricted to the complement of `|Ω⟩`.
pub fn ccp_by_cholesky(s: &SuperOperator) -> bool {
    let cm = choi(s);
    let q = complement_basis(&maximally_entangled(2));
    let block = q.adjoint() * cm.matrix() * &q;
    let a = (&block + block.adjoint()).scale(0.5) + CMat::identity(3, 3) * c(1e-13, 0.0);
    // explicit factorisation: every pivot must be real and positive
    let n = a.nrows();
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)].re;
        for k in 0..j {
            pivot -= l[(j, k)].norm_sqr();
        }
        if pivot <= 0.0 {
            return false;
        }
        l[(j, j)] = c(pivot.sqrt(), 0.0);
        for i in (j + 1)..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / l[(j, j)];
        }
    }
    true
}

/// Depolarizing rate that makes `s` conditionally completely positive, found
/// by bisection on the Cholesky test of `s + μD` without the closed form.
pub fn mu_by_bisection(s: &SuperOperator) -> f64 {
    let d = depolarizing_generator(2);
    let ccp = |mu: f64| ccp_by_cholesky(&(s + &d.scale(mu)));
    if ccp(0.0) {
        return 0.0;
    }
    let mut hi = 1.0;
    while !ccp(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ccp(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    hi
}
