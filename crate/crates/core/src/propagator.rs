//! Time-ordered integration of `dP/dt = L(t) P`, `P(0) = 1`.
//!
//! The whole N² × N² map is integrated at once; one pass yields the complete
//! superoperator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64};
use crate::model::{GeneratorParts, TimePeriodicLindbladian};
use crate::superop::{choi, trace_preservation_residual, SuperOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorMethod {
    /// Classical fixed-step fourth-order Runge-Kutta.
    Rk4,
    /// Adaptive Dormand-Prince 5(4).
    Dopri5,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub method: IntegratorMethod,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: u64,
    /// Step size never exceeds `T / min_substeps_per_period`; for the fixed
    /// step method it is the number of steps per period.
    pub min_substeps_per_period: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: IntegratorMethod::Dopri5,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 10_000_000,
            min_substeps_per_period: 1000,
        }
    }
}

impl IntegratorConfig {
    pub fn fixed(steps_per_period: usize) -> Self {
        Self {
            method: IntegratorMethod::Rk4,
            min_substeps_per_period: steps_per_period,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidParams("integrator tolerances must be positive".into()));
        }
        if self.max_steps == 0 || self.min_substeps_per_period == 0 {
            return Err(Error::InvalidParams("step limits must be positive".into()));
        }
        Ok(())
    }
}

/// Maps `P(t_k)` sampled on an ascending time grid.
#[derive(Debug, Clone)]
pub struct MapTrajectory {
    pub times: Vec<f64>,
    pub maps: Vec<SuperOperator>,
}

// Dormand-Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Integrator<'a> {
    parts: &'a GeneratorParts,
    cfg: IntegratorConfig,
    h_max: f64,
    gen: CMat,
    k: [CMat; 7],
    tmp: CMat,
    y_new: CMat,
    /// Step size proposed by the controller for the next step.
    h: f64,
    /// Whether `k[0]` holds `L(t) y` for the current state (FSAL).
    fsal: bool,
    steps: u64,
}

impl<'a> Integrator<'a> {
    fn new(parts: &'a GeneratorParts, cfg: IntegratorConfig, period: f64) -> Self {
        let d = parts.static_part.matrix().nrows();
        let z = CMat::zeros(d, d);
        let h_max = period / cfg.min_substeps_per_period as f64;
        Self {
            parts,
            cfg,
            h_max,
            gen: z.clone(),
            k: std::array::from_fn(|_| z.clone()),
            tmp: z.clone(),
            y_new: z,
            h: h_max,
            fsal: false,
            steps: 0,
        }
    }

    fn load_generator(&mut self, t: f64) {
        self.gen.copy_from(self.parts.static_part.matrix());
        for (cm, prof) in &self.parts.modulated {
            let f = prof.at(t);
            self.gen.zip_apply(cm.matrix(), |g, x| *g += x * f);
        }
    }

    fn rhs(&mut self, t: f64, slot: usize, from_tmp: bool) {
        self.load_generator(t);
        let y = if from_tmp { &self.tmp } else { &self.y_new };
        self.k[slot].gemm(c(1.0, 0.0), &self.gen, y, c(0.0, 0.0));
    }

    /// `tmp = y + h Σ a_j k_j`
    fn stage(&mut self, y: &CMat, h: f64, coeffs: &[(usize, f64)]) {
        self.tmp.copy_from(y);
        for &(j, a) in coeffs {
            let s = h * a;
            self.tmp.zip_apply(&self.k[j], |t, kj| *t += kj * s);
        }
    }

    fn advance(&mut self, y: &mut CMat, t0: f64, t1: f64) -> Result<()> {
        match self.cfg.method {
            IntegratorMethod::Rk4 => self.advance_rk4(y, t0, t1),
            IntegratorMethod::Dopri5 => self.advance_dopri(y, t0, t1),
        }
    }

    fn advance_rk4(&mut self, y: &mut CMat, t0: f64, t1: f64) -> Result<()> {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let n = (span / self.h_max - 1e-9).ceil().max(1.0) as u64;
        let h = span / n as f64;
        for i in 0..n {
            let t = t0 + i as f64 * h;
            self.tmp.copy_from(y);
            self.rhs(t, 0, true);
            self.stage(y, h, &[(0, 0.5)]);
            self.rhs(t + 0.5 * h, 1, true);
            self.stage(y, h, &[(1, 0.5)]);
            self.rhs(t + 0.5 * h, 2, true);
            self.stage(y, h, &[(2, 1.0)]);
            self.rhs(t + h, 3, true);
            let w = h / 6.0;
            for (j, b) in [(0usize, 1.0), (1, 2.0), (2, 2.0), (3, 1.0)] {
                let s = w * b;
                y.zip_apply(&self.k[j], |yy, kj| *yy += kj * s);
            }
            self.steps += 1;
            if self.steps > self.cfg.max_steps {
                return Err(Error::IntegratorDiverged {
                    t,
                    reason: "maximum number of steps exceeded".into(),
                });
            }
        }
        Ok(())
    }

    fn advance_dopri(&mut self, y: &mut CMat, t0: f64, t1: f64) -> Result<()> {
        let mut t = t0;
        let (rtol, atol) = (self.cfg.rel_tol, self.cfg.abs_tol);
        while t1 - t > 1e-14 * t1.abs().max(1.0) {
            let clipped = self.h >= t1 - t;
            let h = if clipped { t1 - t } else { self.h };
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::IntegratorDiverged {
                    t,
                    reason: format!("step size underflow (h = {h:.3e})"),
                });
            }
            if !self.fsal {
                self.tmp.copy_from(y);
                self.rhs(t, 0, true);
                self.fsal = true;
            }
            self.stage(y, h, &[(0, A21)]);
            self.rhs(t + C2 * h, 1, true);
            self.stage(y, h, &[(0, A31), (1, A32)]);
            self.rhs(t + C3 * h, 2, true);
            self.stage(y, h, &[(0, A41), (1, A42), (2, A43)]);
            self.rhs(t + C4 * h, 3, true);
            self.stage(y, h, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
            self.rhs(t + C5 * h, 4, true);
            self.stage(y, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
            self.rhs(t + h, 5, true);
            self.stage(y, h, &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)]);
            std::mem::swap(&mut self.tmp, &mut self.y_new);
            self.rhs(t + h, 6, false);

            let mut acc = 0.0;
            let d = y.len();
            for idx in 0..d {
                let e: C64 = (self.k[0][idx] * E1
                    + self.k[2][idx] * E3
                    + self.k[3][idx] * E4
                    + self.k[4][idx] * E5
                    + self.k[5][idx] * E6
                    + self.k[6][idx] * E7)
                    * h;
                let sc = atol + rtol * y[idx].norm().max(self.y_new[idx].norm());
                acc += (e.norm() / sc).powi(2);
            }
            let err = (acc / d as f64).sqrt();

            self.steps += 1;
            if self.steps > self.cfg.max_steps {
                return Err(Error::IntegratorDiverged {
                    t,
                    reason: "maximum number of steps exceeded".into(),
                });
            }
            if !err.is_finite() {
                return Err(Error::IntegratorDiverged {
                    t,
                    reason: "non-finite error estimate".into(),
                });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t += h;
                y.copy_from(&self.y_new);
                self.k.swap(0, 6);
                if !clipped || factor < 1.0 {
                    self.h = (h * factor).min(self.h_max);
                }
            } else {
                self.h = (h * factor.min(1.0)).min(self.h_max);
            }
        }
        Ok(())
    }
}

/// Map from `t0` to `t1` of the time-periodic generator.
pub fn propagate(m: &TimePeriodicLindbladian, t0: f64, t1: f64, cfg: &IntegratorConfig) -> Result<SuperOperator> {
    cfg.validate()?;
    if !(t1 >= t0) {
        return Err(Error::InvalidParams(format!("end time {t1} precedes start {t0}")));
    }
    let parts = m.parts();
    let mut integ = Integrator::new(&parts, *cfg, m.period());
    let d = m.hdim() * m.hdim();
    let mut y = CMat::identity(d, d);
    integ.advance(&mut y, t0, t1)?;
    let p = SuperOperator::new(m.hdim(), y).map_err(|_| Error::IntegratorDiverged {
        t: t1,
        reason: "non-finite state".into(),
    })?;
    let res = trace_preservation_residual(&p);
    if res > 1e-6 {
        return Err(Error::AccuracyLoss(res));
    }
    Ok(p)
}

/// One-cycle map `P(T) = T exp ∫₀ᵀ L(t) dt`.
pub fn floquet_map(m: &TimePeriodicLindbladian, cfg: &IntegratorConfig) -> Result<SuperOperator> {
    propagate(m, 0.0, m.period(), cfg)
}

/// `P(t)` on the uniform grid `t_k = k t_end / (samples − 1)`. The integration
/// runs continuously through the grid, stopping exactly at every sample.
pub fn propagate_trajectory(
    m: &TimePeriodicLindbladian,
    t_end: f64,
    samples: usize,
    cfg: &IntegratorConfig,
) -> Result<MapTrajectory> {
    cfg.validate()?;
    if !(t_end > 0.0) || samples < 2 {
        return Err(Error::InvalidParams("need t_end > 0 and at least two samples".into()));
    }
    let parts = m.parts();
    let mut integ = Integrator::new(&parts, *cfg, m.period());
    let d = m.hdim() * m.hdim();
    let mut y = CMat::identity(d, d);
    let times: Vec<f64> = (0..samples).map(|k| t_end * k as f64 / (samples - 1) as f64).collect();
    let mut maps = Vec::with_capacity(samples);
    maps.push(SuperOperator::identity(m.hdim()));
    for w in times.windows(2) {
        integ.advance(&mut y, w[0], w[1])?;
        let p = SuperOperator::new(m.hdim(), y.clone()).map_err(|_| Error::IntegratorDiverged {
            t: w[1],
            reason: "non-finite state".into(),
        })?;
        let res = trace_preservation_residual(&p);
        if res > 1e-6 {
            return Err(Error::AccuracyLoss(res));
        }
        maps.push(p);
    }
    Ok(MapTrajectory { times, maps })
}

/// Choi eigenvalues of every map of a trajectory. The first sample is sorted
/// ascending; later samples are ordered to follow the previous one by
/// nearest-neighbour matching.
pub fn choi_eigenvalue_trajectory(traj: &MapTrajectory) -> Vec<(f64, Vec<f64>)> {
    let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(traj.times.len());
    for (&t, p) in traj.times.iter().zip(&traj.maps) {
        let ev = choi(p).eigenvalues();
        let ordered = match out.last() {
            None => ev,
            Some((_, prev)) => match_to(prev, ev),
        };
        out.push((t, ordered));
    }
    out
}

/// Smallest Choi eigenvalue over all maps of a trajectory.
pub fn min_choi_eigenvalue(traj: &MapTrajectory) -> f64 {
    traj.maps
        .iter()
        .map(|p| choi(p).eigenvalues()[0])
        .fold(f64::INFINITY, f64::min)
}

fn match_to(prev: &[f64], mut next: Vec<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(prev.len());
    for &p in prev {
        let (k, _) = next
            .iter()
            .enumerate()
            .map(|(k, &v)| (k, (v - p).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("same length");
        out.push(next.remove(k));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_two_level_model, DriveParams};
    use crate::superop::{is_completely_positive, is_trace_preserving};

    #[test]
    fn matching_follows_crossing_curves() {
        let prev = vec![0.1, 0.2, 0.9];
        assert_eq!(match_to(&prev, vec![0.11, 0.19, 0.9]), vec![0.11, 0.19, 0.9]);
        assert_eq!(match_to(&prev, vec![0.05, 0.12, 0.91]), vec![0.12, 0.05, 0.91]);
    }

    #[test]
    fn rejects_bad_arguments() {
        let m = build_two_level_model(&DriveParams::new(0.5, 1.0, 0.0, 0.01).unwrap()).unwrap();
        let cfg = IntegratorConfig::default();
        assert!(propagate_trajectory(&m, 0.0, 5, &cfg).is_err());
        assert!(propagate_trajectory(&m, 1.0, 1, &cfg).is_err());
        let bad = IntegratorConfig { rel_tol: 0.0, ..cfg };
        assert!(floquet_map(&m, &bad).is_err());
    }

    #[test]
    fn step_limit_is_reported() {
        let m = build_two_level_model(&DriveParams::new(0.5, 1.0, 0.0, 0.01).unwrap()).unwrap();
        let cfg = IntegratorConfig {
            max_steps: 10,
            ..IntegratorConfig::default()
        };
        assert!(matches!(floquet_map(&m, &cfg), Err(Error::IntegratorDiverged { .. })));
    }

    #[test]
    fn driven_map_is_cptp() {
        let m = build_two_level_model(&DriveParams::new(1.2, 0.9, 0.3, 0.05).unwrap()).unwrap();
        let p = floquet_map(&m, &IntegratorConfig::default()).unwrap();
        assert!(is_trace_preserving(&p, 1e-9));
        assert!(is_completely_positive(&p, 1e-9).0);
    }

    fn eig_sorted(p: &SuperOperator) -> Vec<C64> {
        let mut v = crate::linalg::eigen_general(p.matrix(), 1e-8, 1e8).unwrap().values;
        v.sort_by(|a, b| {
            (a.re * 1e9)
                .round()
                .total_cmp(&(b.re * 1e9).round())
                .then(a.im.total_cmp(&b.im))
        });
        v
    }

    #[test]
    fn undriven_map_matches_closed_form() {
        let gamma = 0.01;
        let m = build_two_level_model(&DriveParams::new(0.0, 1.7, 0.0, gamma).unwrap()).unwrap();
        let t = m.period();
        let p = floquet_map(&m, &IntegratorConfig::default()).unwrap();
        let mut expected: Vec<C64> = [c(0.0, 0.0), c(-gamma, 0.0), c(-gamma / 2.0, 1.0), c(-gamma / 2.0, -1.0)]
            .iter()
            .map(|l| (l * t).exp())
            .collect();
        expected.sort_by(|a, b| {
            (a.re * 1e9)
                .round()
                .total_cmp(&(b.re * 1e9).round())
                .then(a.im.total_cmp(&b.im))
        });
        for (a, b) in eig_sorted(&p).iter().zip(&expected) {
            assert!((a - b).norm() < 1e-9, "{a} vs {b}");
        }
        let exact = crate::superop::matrix_exp(&m.generator_at(0.0), t);
        assert!(p.distance(&exact) < 1e-9);
    }

    #[test]
    fn two_periods_compose() {
        let m = build_two_level_model(&DriveParams::new(0.8, 1.3, 0.2, 0.03).unwrap()).unwrap();
        let cfg = IntegratorConfig::default();
        let p1 = floquet_map(&m, &cfg).unwrap();
        let p2 = propagate(&m, 0.0, 2.0 * m.period(), &cfg).unwrap();
        assert!(p2.distance(&p1.compose(&p1)) < 1e-8);
    }

    #[test]
    fn phase_equals_time_offset() {
        let (om, phi) = (1.1, 0.7);
        let cfg = IntegratorConfig::default();
        let shifted = build_two_level_model(&DriveParams::new(1.4, om, phi, 0.02).unwrap()).unwrap();
        let base = build_two_level_model(&DriveParams::new(1.4, om, 0.0, 0.02).unwrap()).unwrap();
        let a = floquet_map(&shifted, &cfg).unwrap();
        let b = propagate(&base, phi / om, phi / om + base.period(), &cfg).unwrap();
        assert!(a.distance(&b) < 1e-8);
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let m = build_two_level_model(&DriveParams::new(1.5, 1.5, 0.0, 0.05).unwrap()).unwrap();
        let reference = floquet_map(
            &m,
            &IntegratorConfig {
                rel_tol: 1e-13,
                abs_tol: 1e-15,
                ..IntegratorConfig::default()
            },
        )
        .unwrap();
        let e1 = floquet_map(&m, &IntegratorConfig::fixed(40))
            .unwrap()
            .distance(&reference);
        let e2 = floquet_map(&m, &IntegratorConfig::fixed(80))
            .unwrap()
            .distance(&reference);
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn trajectory_samples_are_consistent() {
        let m = build_two_level_model(&DriveParams::new(1.0, 2.0, 0.0, 0.02).unwrap()).unwrap();
        let cfg = IntegratorConfig::default();
        let traj = propagate_trajectory(&m, m.period(), 9, &cfg).unwrap();
        assert_eq!(traj.maps.len(), 9);
        let p = floquet_map(&m, &cfg).unwrap();
        assert!(traj.maps[8].distance(&p) < 1e-9);
        let ev = choi_eigenvalue_trajectory(&traj);
        assert!((ev[0].1[3] - 1.0).abs() < 1e-12);
        for (_, v) in &ev {
            assert!(v.iter().all(|&x| x > -1e-9));
        }
    }
}
