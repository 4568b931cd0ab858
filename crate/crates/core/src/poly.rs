//! Simultaneous root finding for complex polynomials (Aberth–Ehrlich).

use std::f64::consts::PI;

use crate::linalg::{c, C64};

/// `p(z)/p'(z)` for `p(z) = Σ a_n zⁿ`. For `|z| > 1` the reversed polynomial
/// is evaluated instead so that high powers never overflow.
fn newton_ratio(a: &[C64], z: C64) -> C64 {
    let n = a.len() - 1;
    if z.norm() <= 1.0 {
        let mut p = a[n];
        let mut dp = c(0.0, 0.0);
        for k in (0..n).rev() {
            dp = dp * z + p;
            p = p * z + a[k];
        }
        p / dp
    } else {
        // p(z) = zⁿ q(y), y = 1/z, q(y) = Σ a_{n−k} y^k
        let y = z.inv();
        let mut q = a[0];
        let mut dq = c(0.0, 0.0);
        for k in 1..=n {
            dq = dq * y + q;
            q = q * y + a[k];
        }
        // p'/p = n/z − y² q'(y)/q(y)
        let inv = c(n as f64, 0.0) * y - y * y * dq / q;
        inv.inv()
    }
}

/// Starting points on circles whose radii come from the upper convex hull of
/// `(k, ln|a_k|)`.
fn initial_guesses(a: &[C64]) -> Vec<C64> {
    let n = a.len() - 1;
    let pts: Vec<(usize, f64)> = a
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > 0.0)
        .map(|(k, z)| (k, z.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (k1, l1) = hull[hull.len() - 2];
            let (k2, l2) = hull[hull.len() - 1];
            let cross = (k2 as f64 - k1 as f64) * (p.1 - l1) - (l2 - l1) * (p.0 as f64 - k1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(n);
    // zero coefficients at the bottom mean roots at the origin
    let lowest = hull.first().map(|h| h.0).unwrap_or(0);
    for _ in 0..lowest {
        out.push(c(1e-300, 0.0));
    }
    for (seg, w) in hull.windows(2).enumerate() {
        let (i, li) = w[0];
        let (j, lj) = w[1];
        let m = j - i;
        let r = ((li - lj) / m as f64).exp();
        for k in 0..m {
            let ang = 2.0 * PI * k as f64 / m as f64 + 0.4 + 0.7 * seg as f64;
            out.push(C64::from_polar(r, ang));
        }
    }
    out
}

/// All roots of `Σ_{n} a_n zⁿ` (coefficients in ascending order; trailing
/// zero coefficients are dropped). After `max_iter` sweeps the current
/// estimates are returned as they stand; they are meant to be polished on the
/// underlying function.
pub fn aberth_roots(coeffs: &[C64], max_iter: usize) -> Vec<C64> {
    let mut a: Vec<C64> = coeffs.to_vec();
    while a.last().map_or(false, |z| z.norm() == 0.0) {
        a.pop();
    }
    if a.len() < 2 {
        return Vec::new();
    }
    let n = a.len() - 1;
    let mut z = initial_guesses(&a);
    debug_assert_eq!(z.len(), n);
    let mut done = vec![false; n];
    for _ in 0..max_iter {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let ratio = newton_ratio(&a, z[i]);
            let mut sum = c(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    sum += (z[i] - z[j]).inv();
                }
            }
            let delta = ratio / (c(1.0, 0.0) - ratio * sum);
            if !(delta.re.is_finite() && delta.im.is_finite()) {
                done[i] = true;
                continue;
            }
            z[i] -= delta;
            if delta.norm() <= 1e-13 * z[i].norm().max(1e-300) {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_roots(roots: &[C64]) -> Vec<C64> {
        let mut p = vec![c(1.0, 0.0)];
        for &r in roots {
            let mut q = vec![c(0.0, 0.0); p.len() + 1];
            for (k, &a) in p.iter().enumerate() {
                q[k + 1] += a;
                q[k] -= a * r;
            }
            p = q;
        }
        p
    }

    #[test]
    fn recovers_known_roots() {
        let roots = [c(1.0, 0.0), c(-2.0, 0.5), c(0.3, -3.0), c(10.0, 1.0), c(-0.01, 0.0)];
        let found = aberth_roots(&from_roots(&roots), 500);
        for r in roots {
            let best = found.iter().map(|f| (f - r).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-10 * r.norm().max(1.0), "{r}: {best}");
        }
    }

    #[test]
    fn widely_scaled_coefficients() {
        // truncated exponential series: coefficients 1/n!
        let mut a = vec![c(1.0, 0.0)];
        for k in 1..=40 {
            let prev = a[k - 1];
            a.push(prev / k as f64);
        }
        let found = aberth_roots(&a, 1000);
        assert_eq!(found.len(), 40);
        for z in found {
            // backward error relative to the term magnitudes
            let (mut p, mut mag, mut zk) = (c(0.0, 0.0), 0.0, c(1.0, 0.0));
            for &ak in &a {
                p += ak * zk;
                mag += (ak * zk).norm();
                zk *= z;
            }
            assert!(p.norm() < 1e-13 * mag, "{z}: {}", p.norm() / mag);
        }
    }

    #[test]
    fn constant_polynomial_has_no_roots() {
        assert!(aberth_roots(&[c(2.0, 0.0)], 10).is_empty());
        assert!(aberth_roots(&[c(2.0, 0.0), c(0.0, 0.0)], 10).is_empty());
    }
}
