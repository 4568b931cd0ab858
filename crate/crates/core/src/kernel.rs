//! Time-homogeneous memory-kernel generator with exponential kernel
//! `ρ̇(t) = ∫₀ᵗ dτ' e^{(τ'−t)/τ} L_K ρ(τ')`.
//!
//! Every spectral component of `P(T)` evolves as `h_a(t) M_a` with
//! `h_a(t) = e^{−t/2τ}[cosh Γt + sinh(Γt)/(2Γτ)]`, `Γ = (1/4τ² + λ^K_a)^{1/2}`.
//! Requiring `h_a(T) = λ_a` fixes the kernel eigenvalues `λ^K_a`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, C64};
use crate::poly::aberth_roots;
use crate::propagator::MapTrajectory;
use crate::spectral::{EigenKind, SpectralDecomposition};
use crate::superop::{choi, trace_annihilation_residual, SuperOperator};

pub const DEFAULT_SERIES_ORDER: usize = 60;
pub const DEFAULT_CANDIDATES: usize = 3;
/// Largest accepted `|h_a(T) − λ_a|`.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-8;

/// `(e^{−u} cosh x, e^{−u} sinh(x)/x)` without overflow for large `|x|`, `u`.
fn damped_cosh_sinhc(x: C64, u: f64) -> (C64, C64) {
    if x.norm() < 1e-4 {
        let x2 = x * x;
        let e = (-u).exp();
        let ch = c(1.0, 0.0) + x2 / 2.0 + x2 * x2 / 24.0;
        let sc = c(1.0, 0.0) + x2 / 6.0 + x2 * x2 / 120.0;
        (ch * e, sc * e)
    } else {
        let ep = (x - u).exp();
        let em = (-x - u).exp();
        ((ep + em) / 2.0, (ep - em) / (x * 2.0))
    }
}

fn gamma_t(lambda_k: C64, tau: f64) -> C64 {
    (c(0.25 / (tau * tau), 0.0) + lambda_k).sqrt()
}

/// `h(t)` for kernel eigenvalue `λ^K` and memory time `τ`.
pub fn h_function(lambda_k: C64, tau: f64, t: f64) -> C64 {
    let u = t / (2.0 * tau);
    let (ch, sc) = damped_cosh_sinhc(gamma_t(lambda_k, tau) * t, u);
    ch + sc * u
}

/// `dh/dt = e^{−t/2τ} λ^K sinh(Γt)/Γ`.
pub fn h_derivative(lambda_k: C64, tau: f64, t: f64) -> C64 {
    let u = t / (2.0 * tau);
    let (_, sc) = damped_cosh_sinhc(gamma_t(lambda_k, tau) * t, u);
    lambda_k * sc * t
}

// 8-point Gauss–Legendre rule on [−1, 1]
const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gauss_legendre(f: &impl Fn(f64) -> C64, a: f64, b: f64) -> C64 {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    let mut s = c(0.0, 0.0);
    for k in 0..4 {
        s += (f(mid - half * GL_X[k]) + f(mid + half * GL_X[k])) * GL_W[k];
    }
    s * half
}

/// Largest violation of `h'(t) = ∫₀ᵗ e^{(s−t)/τ} λ^K h(s) ds` on the grid,
/// together with the initial conditions `h(0) = 1`, `h'(0) = 0`.
///
/// The right-hand side uses composite Gauss–Legendre quadrature and the
/// recursion `J(t₂) = e^{−(t₂−t₁)/τ} J(t₁) + ∫_{t₁}^{t₂}`.
pub fn integro_residual(h: impl Fn(f64) -> C64, dh: impl Fn(f64) -> C64, lambda_k: C64, tau: f64, grid: &[f64]) -> f64 {
    let mut worst = (h(0.0) - c(1.0, 0.0)).norm().max(dh(0.0).norm());
    let scale = tau.min(1.0 / gamma_t(lambda_k, tau).norm().max(1e-300)).min(1.0);
    let mut j = c(0.0, 0.0);
    let mut prev = 0.0;
    for &t in grid {
        assert!(t >= prev, "grid must ascend from 0");
        let len = t - prev;
        if len > 0.0 {
            let panels = ((len / (0.25 * scale)).ceil() as usize).clamp(1, 100_000);
            let w = len / panels as f64;
            let integrand = |s: f64| (-(t - s) / tau).exp() * h(s) * lambda_k;
            let mut part = c(0.0, 0.0);
            for p in 0..panels {
                part += gauss_legendre(&integrand, prev + p as f64 * w, prev + (p + 1) as f64 * w);
            }
            j = j * (-len / tau).exp() + part;
        }
        worst = worst.max((dh(t) - j).norm());
        prev = t;
    }
    worst
}

/// [`integro_residual`] of the closed form.
pub fn verify_h_integrodifferential(lambda_k: C64, tau: f64, grid: &[f64]) -> f64 {
    integro_residual(
        |t| h_function(lambda_k, tau, t),
        |t| h_derivative(lambda_k, tau, t),
        lambda_k,
        tau,
        grid,
    )
}

/// `h(T) − λ` and its derivative in `s = ΓT`, with `g = T/2τ`:
/// `h(T) = e^{−g}[cosh s + g sinh(s)/s]`.
fn h_of_s(s: C64, g: f64, lambda: C64) -> (C64, C64) {
    let (ch, sc) = damped_cosh_sinhc(s, g);
    let f = ch + sc * g - lambda;
    // e^{−g} sinh s and e^{−g} d/ds[sinh(s)/s]
    let (sh, dsc) = if s.norm() < 1e-4 {
        let e = (-g).exp();
        let s2 = s * s;
        (s * sc, (s / 3.0 + s * s2 / 30.0 + s * s2 * s2 / 840.0) * e)
    } else {
        let sh = sc * s;
        (sh, (ch - sc) / s)
    };
    (f, sh + dsc * g)
}

fn polish(mut s: C64, g: f64, lambda: C64) -> Option<C64> {
    for _ in 0..100 {
        let (f, df) = h_of_s(s, g, lambda);
        if df.norm() == 0.0 || !(f.re.is_finite() && f.im.is_finite()) {
            return None;
        }
        let step = f / df;
        s -= step;
        if !(s.re.is_finite() && s.im.is_finite()) {
            return None;
        }
        if step.norm() <= 1e-15 * s.norm().max(1.0) {
            break;
        }
    }
    // s and −s describe the same root
    Some(if s.re < 0.0 || (s.re == 0.0 && s.im < 0.0) {
        -s
    } else {
        s
    })
}

/// Candidate kernel eigenvalues `λ^K` with `h(T) = λ_a`, sorted by `|Im λ^K|`
/// then `|λ^K|`.
///
/// `h(T)` is even in `s = ΓT`, so with `w = s²` and `g = T/2τ` the condition
/// reads `Σ_n wⁿ [1/(2n)! + g/(2n+1)!] = λ_a e^{g}`. The series is cut at
/// `n0`, its roots found simultaneously, roots whose truncated tail is not
/// negligible dropped, and the rest polished by Newton's method on the closed
/// form. Roots of `e^{s−g}(1 + g/s)/2 ≈ λ_a` near `s = g + ln λ_a + 2πik`
/// seed the same polishing, which covers large `g` where the truncated series
/// no longer resolves the roots. λ^K = (s² − g²)/T².
pub fn solve_lambda_k(lambda_a: C64, tau: f64, period: f64, n0: usize) -> Result<Vec<C64>> {
    if !(tau > 0.0 && period > 0.0) || n0 == 0 {
        return Err(Error::InvalidParams("tau, T and n0 must be positive".into()));
    }
    let g = period / (2.0 * tau);
    let mut seeds: Vec<C64> = Vec::new();

    // truncated series in w; skip when e^g overflows the coefficient range
    if g < 200.0 {
        let mut coeffs = Vec::with_capacity(n0 + 1);
        let mut inv_fact_even = 1.0; // 1/(2n)!
        for n in 0..=n0 {
            if n > 0 {
                inv_fact_even /= ((2 * n - 1) * (2 * n)) as f64;
            }
            let inv_fact_odd = inv_fact_even / (2 * n + 1) as f64;
            coeffs.push(c(inv_fact_even + g * inv_fact_odd, 0.0));
        }
        coeffs[0] -= lambda_a * g.exp();
        for w in aberth_roots(&coeffs, 500) {
            let tail = (coeffs[n0] * w.powu(n0 as u32)).norm();
            let total: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, a)| (a * w.powu(k as u32)).norm())
                .sum();
            if tail.is_finite() && tail <= 1e-8 * total {
                seeds.push(w.sqrt());
            }
        }
    }
    let ln_l = lambda_a.ln();
    for k in -3i32..=3 {
        let shift = c(0.0, 2.0 * std::f64::consts::PI * k as f64);
        seeds.push(c(g, 0.0) + ln_l + shift);
        seeds.push((lambda_a * g.exp()).acosh() + shift);
    }

    let mut found: Vec<C64> = Vec::new();
    for s0 in seeds {
        if !(s0.re.is_finite() && s0.im.is_finite()) {
            continue;
        }
        let Some(s) = polish(s0, g, lambda_a) else { continue };
        let lk = (s - g) * (s + g) / (period * period);
        if (h_function(lk, tau, period) - lambda_a).norm() > ROOT_RESIDUAL_TOL {
            continue;
        }
        if found
            .iter()
            .all(|f| (f - lk).norm() > 1e-8 * lk.norm().max(1.0 / (tau * period)))
        {
            found.push(lk);
        }
    }
    if found.is_empty() {
        return Err(Error::NoConvergedRoot {
            re: lambda_a.re,
            im: lambda_a.im,
        });
    }
    found.sort_by(|a, b| {
        a.im.abs()
            .total_cmp(&b.im.abs())
            .then(a.norm().total_cmp(&b.norm()))
            .then(a.re.total_cmp(&b.re))
            .then(b.im.total_cmp(&a.im))
    });
    Ok(found)
}

#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub tau_mem: f64,
    /// `λ^K_a`, aligned with the decomposition's components.
    pub lambda_k: Vec<C64>,
    pub l_k: SuperOperator,
    /// Whether some component had more valid roots than the candidate cap.
    pub cap_hit: bool,
}

impl KernelSpec {
    pub fn max_residual(&self, dec: &SpectralDecomposition, period: f64) -> f64 {
        self.lambda_k
            .iter()
            .zip(dec.eigenvalues())
            .map(|(&lk, &l)| (h_function(lk, self.tau_mem, period) - l).norm())
            .fold(0.0, f64::max)
    }
}

/// Lindblad-form test used for kernel generators; tolerances are relative to
/// the size of the generator, which grows like `1/τ` for short memory.
pub fn kernel_is_valid(l_k: &SuperOperator) -> bool {
    let cm = choi(l_k);
    let scale = linalg::frob(cm.matrix()).max(1.0);
    if cm.hermiticity_residual() > 1e-9 * scale {
        return false;
    }
    if trace_annihilation_residual(l_k) > 1e-9 * l_k.norm().max(1.0) {
        return false;
    }
    linalg::min_hermitian_eigenvalue(&cm.projected_block()) >= -1e-9 * scale
}

/// Slot of the kernel assignment: either a single real component or a
/// conjugate pair whose lower member receives the conjugate root.
enum Slot {
    Real(usize),
    Pair(usize, usize),
}

/// Kernel generator for memory time `tau`, or `None` if no combination of
/// candidate roots yields a Lindbladian.
pub fn build_kernel_lindbladian(
    dec: &SpectralDecomposition,
    tau: f64,
    period: f64,
    candidates_per_eigenvalue: usize,
) -> Result<Option<KernelSpec>> {
    build_kernel_with_order(dec, tau, period, candidates_per_eigenvalue, DEFAULT_SERIES_ORDER)
}

pub fn build_kernel_with_order(
    dec: &SpectralDecomposition,
    tau: f64,
    period: f64,
    candidates_per_eigenvalue: usize,
    n0: usize,
) -> Result<Option<KernelSpec>> {
    let unit = dec
        .unit_index()
        .ok_or_else(|| Error::DefectiveDecomposition("no unit eigenvalue".into()))?;
    let cap = candidates_per_eigenvalue.max(1);
    let mut slots = Vec::new();
    let mut options: Vec<Vec<C64>> = Vec::new();
    let mut cap_hit = false;
    for (a, kind) in dec.kinds().iter().enumerate() {
        let lam = dec.eigenvalues()[a];
        let cands = match *kind {
            EigenKind::Unit => continue,
            EigenKind::Real | EigenKind::UnpairedNegative => {
                slots.push(Slot::Real(a));
                match solve_lambda_k(c(lam.re, 0.0), tau, period, n0) {
                    Ok(v) => v
                        .into_iter()
                        .filter(|z| z.im.abs() <= 1e-9 * z.norm().max(1.0))
                        .collect(),
                    Err(_) => Vec::new(),
                }
            }
            EigenKind::Pair { pair, upper: true } => {
                slots.push(Slot::Pair(a, dec.pairs()[pair].1));
                // a degenerate negative pair has λ real; the upper member
                // still carries the root, the lower its conjugate
                solve_lambda_k(lam, tau, period, n0).unwrap_or_default()
            }
            EigenKind::Pair { upper: false, .. } => continue,
        };
        if cands.is_empty() {
            return Ok(None);
        }
        cap_hit |= cands.len() > cap;
        options.push(cands.into_iter().take(cap).collect());
    }

    // all index combinations, by total |Im| then lexicographically
    let mut combos: Vec<Vec<usize>> = vec![vec![]];
    for opt in &options {
        combos = combos
            .into_iter()
            .flat_map(|p| {
                (0..opt.len()).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    let cost = |combo: &[usize]| -> f64 {
        combo
            .iter()
            .zip(&options)
            .zip(&slots)
            .map(|((&i, o), s)| {
                let w = if matches!(s, Slot::Pair(..)) { 2.0 } else { 1.0 };
                w * o[i].im.abs()
            })
            .sum()
    };
    combos.sort_by(|a, b| cost(a).total_cmp(&cost(b)).then_with(|| a.cmp(b)));

    for combo in combos {
        let mut lk = vec![c(0.0, 0.0); dec.len()];
        lk[unit] = c(0.0, 0.0);
        for ((&i, o), s) in combo.iter().zip(&options).zip(&slots) {
            match *s {
                Slot::Real(a) => lk[a] = c(o[i].re, 0.0),
                Slot::Pair(up, lo) => {
                    lk[up] = o[i];
                    lk[lo] = o[i].conj();
                }
            }
        }
        let l_k = dec.apply_function(|a, _| lk[a]);
        if kernel_is_valid(&l_k) {
            return Ok(Some(KernelSpec {
                tau_mem: tau,
                lambda_k: lk,
                l_k,
                cap_hit,
            }));
        }
    }
    Ok(None)
}

/// Scan and refinement settings for [`minimal_memory_time`]; lengths in units
/// of the period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TauScan {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub tol: f64,
    pub candidates: usize,
    /// Evaluate every grid point, not only up to the first valid one.
    pub full_scan: bool,
}

impl Default for TauScan {
    fn default() -> Self {
        Self {
            lo: 1e-2,
            hi: 10.0,
            points: 40,
            tol: 1e-2,
            candidates: DEFAULT_CANDIDATES,
            full_scan: true,
        }
    }
}

impl TauScan {
    pub fn grid(&self, period: f64) -> Vec<f64> {
        let n = self.points.max(1);
        if n == 1 {
            return vec![self.lo * period];
        }
        let r = (self.hi / self.lo).ln() / (n - 1) as f64;
        (0..n).map(|k| self.lo * period * (r * k as f64).exp()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.hi >= self.lo && self.tol > 0.0 && self.points >= 1) {
            return Err(Error::InvalidParams("invalid memory-time scan".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct KernelReport {
    /// 0 when a valid kernel exists at the resolution floor.
    pub tau_min: f64,
    pub spec_at_tau_min: Option<KernelSpec>,
    pub scan: Vec<(f64, bool)>,
    /// Extra evaluations made while refining.
    pub refinement: Vec<(f64, bool)>,
    pub resolution_floor: f64,
}

/// Smallest memory time admitting a valid kernel generator.
pub fn minimal_memory_time(dec: &SpectralDecomposition, period: f64, scan: &TauScan) -> Result<KernelReport> {
    scan.validate()?;
    let grid = scan.grid(period);
    let floor = grid[0];
    let tol = scan.tol * period;
    let eval = |tau: f64| build_kernel_lindbladian(dec, tau, period, scan.candidates);

    let mut table = Vec::with_capacity(grid.len());
    let mut first_valid: Option<(usize, KernelSpec)> = None;
    for (k, &tau) in grid.iter().enumerate() {
        let spec = eval(tau)?;
        table.push((tau, spec.is_some()));
        if first_valid.is_none() {
            if let Some(s) = spec {
                first_valid = Some((k, s));
                if !scan.full_scan {
                    break;
                }
            }
        }
    }
    let Some((k, spec)) = first_valid else {
        return Err(Error::NoValidKernelInRange {
            lo: floor,
            hi: *grid.last().expect("non-empty grid"),
        });
    };
    if k == 0 {
        return Ok(KernelReport {
            tau_min: 0.0,
            spec_at_tau_min: Some(spec),
            scan: table,
            refinement: Vec::new(),
            resolution_floor: floor,
        });
    }

    let mut refinement = Vec::new();
    let (mut lo, mut hi, mut best) = (grid[k - 1], grid[k], spec);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let s = eval(mid)?;
        refinement.push((mid, s.is_some()));
        match s {
            Some(s) => {
                hi = mid;
                best = s;
            }
            None => lo = mid,
        }
    }
    // validity need not be monotone: step down until one tolerance below fails
    while hi - tol > floor {
        let probe = hi - tol;
        let s = eval(probe)?;
        refinement.push((probe, s.is_some()));
        match s {
            Some(s) => {
                hi = probe;
                best = s;
            }
            None => break,
        }
    }
    Ok(KernelReport {
        tau_min: hi,
        spec_at_tau_min: Some(best),
        scan: table,
        refinement,
        resolution_floor: floor,
    })
}

/// Decades below the scan floor searched by [`resolve_below_floor`].
pub const SUB_FLOOR_DECADES: i32 = 4;

/// Locates the memory time of a map without a Markovian generator whose kernel
/// is already valid at the scan floor. Probes `floor·10⁻ᵏ` for
/// `k = 1..=decades`; at the first invalid probe, bisects geometrically to a
/// relative tolerance `scan.tol`. When every probe is valid the smallest one is
/// returned as an upper bound. Reports from a non-zero `tau_min` are returned
/// unchanged.
pub fn resolve_below_floor(
    report: KernelReport,
    dec: &SpectralDecomposition,
    period: f64,
    scan: &TauScan,
    decades: i32,
) -> Result<KernelReport> {
    if report.tau_min != 0.0 {
        return Ok(report);
    }
    let eval = |tau: f64| build_kernel_lindbladian(dec, tau, period, scan.candidates);
    let mut refinement = report.refinement;
    let mut hi = report.resolution_floor;
    let mut best = report.spec_at_tau_min.expect("valid at the floor");
    let mut lo = None;
    for k in 1..=decades {
        let tau = report.resolution_floor * 10f64.powi(-k);
        let s = eval(tau)?;
        refinement.push((tau, s.is_some()));
        match s {
            Some(s) => {
                hi = tau;
                best = s;
            }
            None => {
                lo = Some(tau);
                break;
            }
        }
    }
    if let Some(mut lo) = lo {
        while hi / lo > 1.0 + scan.tol {
            let mid = (lo * hi).sqrt();
            let s = eval(mid)?;
            refinement.push((mid, s.is_some()));
            match s {
                Some(s) => {
                    hi = mid;
                    best = s;
                }
                None => lo = mid,
            }
        }
    }
    Ok(KernelReport {
        tau_min: hi,
        spec_at_tau_min: Some(best),
        scan: report.scan,
        refinement,
        resolution_floor: report.resolution_floor,
    })
}

/// `P̃(t) = Σ_a h_a(t) M_a` on `[0, T]`, continued with memory erasure at
/// every multiple of `T`: `P̃(nT + s) = P̃(s) P̃(T)ⁿ`.
pub fn kernel_map_at(spec: &KernelSpec, dec: &SpectralDecomposition, period: f64, t: f64) -> SuperOperator {
    let n = (t / period + 1e-12).floor().max(0.0);
    let s = (t - n * period).max(0.0);
    let hs: Vec<C64> = spec
        .lambda_k
        .iter()
        .map(|&lk| h_function(lk, spec.tau_mem, s) * h_function(lk, spec.tau_mem, period).powf(n))
        .collect();
    dec.apply_function(|a, _| hs[a])
}

pub fn kernel_evolution(
    spec: &KernelSpec,
    dec: &SpectralDecomposition,
    period: f64,
    t_end: f64,
    samples: usize,
) -> Result<MapTrajectory> {
    if !(t_end > 0.0) || samples < 2 {
        return Err(Error::InvalidParams("need t_end > 0 and at least two samples".into()));
    }
    let times: Vec<f64> = (0..samples).map(|k| t_end * k as f64 / (samples - 1) as f64).collect();
    let maps = times.iter().map(|&t| kernel_map_at(spec, dec, period, t)).collect();
    Ok(MapTrajectory { times, maps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_kernel_is_constant() {
        for &t in &[0.0, 0.3, 5.0, 100.0] {
            assert!((h_function(c(0.0, 0.0), 0.7, t) - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn initial_slope_vanishes() {
        let lk = c(-0.8, 0.4);
        let d = 1e-6;
        let fd = (h_function(lk, 0.5, d) - h_function(lk, 0.5, 0.0)) / d;
        assert!(fd.norm() < 1e-5);
        assert!(h_derivative(lk, 0.5, 0.0).norm() < 1e-15);
        assert!((h_function(lk, 0.5, 0.0) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for &(lk, tau, t) in &[
            (c(-1.3, 0.2), 0.4, 1.1),
            (c(2.0, -1.0), 3.0, 0.7),
            (c(-0.25 / 0.09, 0.0), 0.3, 2.0),
        ] {
            let d = 1e-6;
            let fd = (h_function(lk, tau, t + d) - h_function(lk, tau, t - d)) / (2.0 * d);
            assert!((fd - h_derivative(lk, tau, t)).norm() < 1e-7, "{lk}");
        }
    }

    #[test]
    fn critical_gamma_uses_series_limit() {
        // Γ = 0: h = e^{−t/2τ}(1 + t/2τ)
        let tau = 0.5;
        let lk = c(-0.25 / (tau * tau), 0.0);
        let t = 1.3;
        let u = t / (2.0 * tau);
        assert!((h_function(lk, tau, t) - c((-u).exp() * (1.0 + u), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn unit_eigenvalue_has_zero_root() {
        let roots = solve_lambda_k(c(1.0, 0.0), 0.3, 2.0, 60).unwrap();
        assert!(roots.iter().any(|r| r.norm() < 1e-8), "{roots:?}");
    }

    #[test]
    fn roots_satisfy_condition() {
        let t = 2.0 * std::f64::consts::PI / 1.2;
        for &(lam, tau) in &[
            (c(0.5, 0.0), 0.1 * t),
            (c(-0.3, 0.4), t),
            (c(0.9, -0.1), 0.02 * t),
            (c(-0.6, 0.0), 2.0 * t),
        ] {
            let roots = solve_lambda_k(lam, tau, t, 60).unwrap();
            assert!(!roots.is_empty());
            for r in &roots {
                assert!((h_function(*r, tau, t) - lam).norm() <= ROOT_RESIDUAL_TOL);
            }
            for w in roots.windows(2) {
                assert!(w[0].im.abs() <= w[1].im.abs());
            }
        }
    }

    #[test]
    fn short_memory_root_approaches_log() {
        let t = 2.0;
        let tau = 1e-3 * t;
        let roots = solve_lambda_k(c(0.5, 0.0), tau, t, 60).unwrap();
        let scaled = roots[0] * tau;
        let expected = 0.5f64.ln() / t;
        assert!(((scaled.re - expected) / expected).abs() < 1e-3, "{scaled}");
    }

    #[test]
    fn perturbed_solution_is_detected() {
        let lk = c(-1.0, 0.5);
        let grid: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
        let ok = verify_h_integrodifferential(lk, 0.7, &grid);
        assert!(ok < 1e-6, "{ok}");
        let bad = integro_residual(
            |t| h_function(lk, 0.7, t) * 1.01,
            |t| h_derivative(lk, 0.7, t) * 1.01,
            lk,
            0.7,
            &grid,
        );
        assert!(bad > 1e-3);
        assert_eq!(verify_h_integrodifferential(c(0.0, 0.0), 0.7, &grid), 0.0);
    }

    #[test]
    fn scan_grid_is_geometric() {
        let g = TauScan::default().grid(2.0);
        assert_eq!(g.len(), 40);
        assert!((g[0] - 0.02).abs() < 1e-15);
        assert!((g[39] - 20.0).abs() < 1e-12);
        let r = g[1] / g[0];
        assert!((g[20] / g[19] - r).abs() < 1e-12);
    }
}
