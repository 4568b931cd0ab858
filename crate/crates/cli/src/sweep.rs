//! Parallel grid sweeps and phase-extent summaries.

use floquet_core::model::DriveParams;
use rayon::prelude::*;
use rayon::ThreadPoolBuilder;
use serde::{Deserialize, Serialize};

use crate::config::SweepConfig;
use crate::error::{CliError, Result};
use crate::point::{run_point, PointConfig, SweepResultRow};

/// Grid points, ω outer and E inner.
pub fn grid_points(cfg: &SweepConfig) -> Result<Vec<DriveParams>> {
    let mut out = Vec::with_capacity(cfg.omega_range.count * cfg.e_range.count);
    for omega in cfg.omega_range.values() {
        for e in cfg.e_range.values() {
            out.push(DriveParams::new(e, omega, cfg.phi, cfg.gamma)?);
        }
    }
    Ok(out)
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepResultRow>> {
    cfg.validate()?;
    let points = grid_points(cfg)?;
    let pc = PointConfig::from(cfg);
    if cfg.workers == 1 {
        return Ok(points.iter().map(|p| run_point(p, &pc)).collect());
    }
    let pool = ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| points.par_iter().map(|p| run_point(p, &pc)).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseExtent {
    pub delta_omega: f64,
    #[serde(rename = "delta_E")]
    pub delta_e: f64,
    pub max_mu: f64,
}

/// Width in ω and E of the non-Lindbladian set and the largest finite `μ_min`.
pub fn phase_extent(rows: &[SweepResultRow]) -> Result<PhaseExtent> {
    let non: Vec<&SweepResultRow> = rows.iter().filter(|r| !r.exists && r.mu_min.is_finite()).collect();
    if non.is_empty() {
        return Err(CliError::EmptyPhase);
    }
    let span = |f: &dyn Fn(&SweepResultRow) -> f64| {
        let lo = non.iter().map(|r| f(r)).fold(f64::INFINITY, f64::min);
        let hi = non.iter().map(|r| f(r)).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let max_mu = rows
        .iter()
        .map(|r| r.mu_min)
        .filter(|m| m.is_finite())
        .fold(0.0, f64::max);
    Ok(PhaseExtent {
        delta_omega: span(&|r| r.omega),
        delta_e: span(&|r| r.e),
        max_mu,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
