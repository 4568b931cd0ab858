//! Choi-eigenvalue curves of the exact evolution, the closest semigroup and
//! the memory-kernel evolution.

use std::io::Write;

use floquet_core::kernel::{build_kernel_lindbladian, kernel_evolution, DEFAULT_CANDIDATES};
use floquet_core::model::{build_two_level_model, DriveParams};
use floquet_core::propagator::{choi_eigenvalue_trajectory, propagate_trajectory, MapTrajectory};
use floquet_core::spectral::branch_generator;
use floquet_core::superop::matrix_exp;

use crate::emit::format_g;
use crate::error::Result;
use crate::point::{analyze_point, PointConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    pub curve: &'static str,
    pub index: usize,
    pub value: f64,
}

fn flatten(curve: &'static str, traj: &MapTrajectory, out: &mut Vec<CurvePoint>) {
    for (t, vals) in choi_eigenvalue_trajectory(traj) {
        for (index, value) in vals.into_iter().enumerate() {
            out.push(CurvePoint { t, curve, index, value });
        }
    }
}

/// Curves `full`, `semigroup` (exp(tS) for the selected branch, if a
/// Hermiticity-preserving logarithm exists) and `kernel` (at `tau`, or at the
/// minimal memory time when `tau` is `None`, if a valid kernel exists).
pub fn trajectory_curves(
    params: &DriveParams,
    cfg: &PointConfig,
    t_end: f64,
    samples: usize,
    tau: Option<f64>,
) -> Result<Vec<CurvePoint>> {
    let mut pc = cfg.clone();
    pc.compute_kernel = tau.is_none();
    let a = analyze_point(params, &pc)?;
    let model = build_two_level_model(params)?;
    let mut out = Vec::new();

    let full = propagate_trajectory(&model, t_end, samples, &cfg.integrator)?;
    flatten("full", &full, &mut out);

    if let Some(b) = &a.markov.best_branch {
        let s = branch_generator(&a.decomposition, &b.x, a.period)?;
        let maps = full.times.iter().map(|&t| matrix_exp(&s, t)).collect();
        let semi = MapTrajectory {
            times: full.times.clone(),
            maps,
        };
        flatten("semigroup", &semi, &mut out);
    }

    let spec = match tau {
        Some(tau) => build_kernel_lindbladian(&a.decomposition, tau, a.period, DEFAULT_CANDIDATES)?,
        None => match &a.kernel {
            Some(Ok(k)) => k.spec_at_tau_min.clone(),
            _ => None,
        },
    };
    if let Some(spec) = spec {
        let k = kernel_evolution(&spec, &a.decomposition, a.period, t_end, samples)?;
        flatten("kernel", &k, &mut out);
    }
    Ok(out)
}

pub fn write_curves<W: Write>(pts: &[CurvePoint], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["t", "curve", "eigenvalue_index", "value"])?;
    for p in pts {
        w.write_record([
            format_g(p.t),
            p.curve.to_string(),
            p.index.to_string(),
            format_g(p.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}
