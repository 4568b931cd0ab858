//! Analysis of a single parameter point: propagator → Markovianity → kernel.

use floquet_core::kernel::{minimal_memory_time, KernelReport, TauScan};
use floquet_core::markovianity::{find_floquet_lindbladian_from, MarkovReport};
use floquet_core::model::{build_two_level_model, DriveParams};
use floquet_core::propagator::{floquet_map, IntegratorConfig};
use floquet_core::spectral::{spectral_decompose, SpectralDecomposition, SpectralOptions};
use floquet_core::superop::SuperOperator;
use floquet_core::Error;
use serde::{Deserialize, Serialize};

use crate::config::SweepConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Defective,
    NoKernel,
    BoundExceeded,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Defective => "defective",
            Status::NoKernel => "no_kernel",
            Status::BoundExceeded => "bound_exceeded",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(Status::Ok),
            "defective" => Some(Status::Defective),
            "no_kernel" => Some(Status::NoKernel),
            "bound_exceeded" => Some(Status::BoundExceeded),
            _ => None,
        }
    }
}

/// One grid point. Unknown quantities are NaN; a missing kernel within the
/// scan range gives `tau_min = inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResultRow {
    pub omega: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub gamma: f64,
    pub phi: f64,
    #[serde(rename = "T")]
    pub period: f64,
    pub exists: bool,
    pub mu_min: f64,
    pub d_rhp: f64,
    pub tau_min: f64,
    pub n_c: usize,
    pub branch: Vec<i64>,
    pub negative_pair: bool,
    pub status: Status,
}

impl SweepResultRow {
    fn defective(p: &DriveParams) -> Self {
        Self {
            omega: p.omega,
            e: p.e,
            gamma: p.gamma,
            phi: p.phi,
            period: p.period(),
            exists: false,
            mu_min: f64::NAN,
            d_rhp: f64::NAN,
            tau_min: f64::NAN,
            n_c: 0,
            branch: Vec::new(),
            negative_pair: false,
            status: Status::Defective,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PointConfig {
    pub integrator: IntegratorConfig,
    pub x_max: i64,
    pub tau_scan: TauScan,
    pub compute_kernel: bool,
}

impl Default for PointConfig {
    fn default() -> Self {
        PointConfig::from(&SweepConfig::default())
    }
}

impl From<&SweepConfig> for PointConfig {
    fn from(c: &SweepConfig) -> Self {
        Self {
            integrator: c.integrator,
            x_max: c.x_max,
            tau_scan: c.tau_scan,
            compute_kernel: c.computes_kernel(),
        }
    }
}

/// Everything computed at one point, for the detailed subcommands.
pub struct PointAnalysis {
    pub params: DriveParams,
    pub period: f64,
    pub floquet_map: SuperOperator,
    pub decomposition: SpectralDecomposition,
    pub markov: MarkovReport,
    pub kernel: Option<std::result::Result<KernelReport, Error>>,
}

pub fn analyze_point(params: &DriveParams, cfg: &PointConfig) -> floquet_core::Result<PointAnalysis> {
    let model = build_two_level_model(params)?;
    let period = model.period();
    let p = floquet_map(&model, &cfg.integrator)?;
    let dec = spectral_decompose(&p, &SpectralOptions::default())?;
    let markov = find_floquet_lindbladian_from(&dec, period, cfg.x_max)?;
    let kernel = cfg
        .compute_kernel
        .then(|| minimal_memory_time(&dec, period, &cfg.tau_scan));
    Ok(PointAnalysis {
        params: *params,
        period,
        floquet_map: p,
        decomposition: dec,
        markov,
        kernel,
    })
}

/// Per-point failures end up in the `status` field; this never errors.
pub fn run_point(params: &DriveParams, cfg: &PointConfig) -> SweepResultRow {
    let Ok(a) = analyze_point(params, cfg) else {
        return SweepResultRow::defective(params);
    };
    let m = &a.markov;
    let mut status = if m.bound_exceeded {
        Status::BoundExceeded
    } else {
        Status::Ok
    };
    let tau_min = match &a.kernel {
        None => {
            if m.exists {
                0.0
            } else {
                f64::NAN
            }
        }
        Some(Ok(k)) => k.tau_min,
        Some(Err(Error::NoValidKernelInRange { .. })) => {
            if status == Status::Ok {
                status = Status::NoKernel;
            }
            f64::INFINITY
        }
        Some(Err(_)) => {
            status = Status::Defective;
            f64::NAN
        }
    };
    SweepResultRow {
        omega: params.omega,
        e: params.e,
        gamma: params.gamma,
        phi: params.phi,
        period: a.period,
        exists: m.exists,
        mu_min: m.mu_min,
        d_rhp: m.d_rhp,
        tau_min,
        n_c: m.n_c,
        branch: m.best_branch.as_ref().map(|b| b.x.clone()).unwrap_or_default(),
        negative_pair: m.negative_pair,
        status,
    }
}
