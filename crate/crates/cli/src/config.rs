//! Sweep configuration: defaults, TOML file, command-line overrides.

use std::path::Path;
use std::str::FromStr;

use floquet_core::kernel::TauScan;
use floquet_core::markovianity::DEFAULT_X_MAX;
use floquet_core::propagator::IntegratorConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// `count` evenly spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridRange {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    pub fn single(v: f64) -> Self {
        Self::new(v, v, 1)
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.max
                } else {
                    self.min + step * k as f64
                }
            })
            .collect()
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if self.count == 0 {
            return Err(CliError::Config(format!("{name}: count must be at least 1")));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(CliError::Config(format!("{name}: need finite min <= max")));
        }
        Ok(())
    }
}

impl FromStr for GridRange {
    type Err = CliError;

    /// `MIN:MAX:N`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || CliError::Config(format!("range `{s}` is not MIN:MAX:N"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let min = parts[0].trim().parse().map_err(|_| bad())?;
        let max = parts[1].trim().parse().map_err(|_| bad())?;
        let count = parts[2].trim().parse().map_err(|_| bad())?;
        Ok(Self { min, max, count })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputField {
    MuMin,
    DRhp,
    Exists,
    TauMin,
    #[serde(rename = "n_c")]
    NC,
    Branch,
}

impl OutputField {
    pub const ALL: [OutputField; 6] = [
        OutputField::MuMin,
        OutputField::DRhp,
        OutputField::Exists,
        OutputField::TauMin,
        OutputField::NC,
        OutputField::Branch,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub gamma: f64,
    pub phi: f64,
    pub omega_range: GridRange,
    pub e_range: GridRange,
    pub integrator: IntegratorConfig,
    pub x_max: i64,
    pub tau_scan: TauScan,
    /// Quantities to compute; the memory-time scan only runs when `tau_min`
    /// is listed.
    pub outputs: Vec<OutputField>,
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            gamma: 0.01,
            phi: 0.0,
            omega_range: GridRange::new(0.4, 3.0, 40),
            e_range: GridRange::new(0.0, 3.0, 40),
            integrator: IntegratorConfig::default(),
            x_max: DEFAULT_X_MAX,
            tau_scan: TauScan {
                full_scan: false,
                ..TauScan::default()
            },
            outputs: OutputField::ALL.to_vec(),
            workers: 1,
        }
    }
}

impl SweepConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(s)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.omega_range.validate("omega_range")?;
        self.e_range.validate("e_range")?;
        if self.omega_range.min <= 0.0 {
            return Err(CliError::Config("omega must be positive".into()));
        }
        if self.e_range.min < 0.0 {
            return Err(CliError::Config("E must be non-negative".into()));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) || !self.phi.is_finite() {
            return Err(CliError::Config("gamma must be >= 0 and phi finite".into()));
        }
        if self.x_max < 0 {
            return Err(CliError::Config("x_max must be >= 0".into()));
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be >= 1".into()));
        }
        self.integrator.validate()?;
        self.tau_scan.validate()?;
        Ok(())
    }

    pub fn computes_kernel(&self) -> bool {
        self.outputs.contains(&OutputField::TauMin)
    }

    pub fn grid_shape(&self) -> (usize, usize) {
        (self.omega_range.count, self.e_range.count)
    }
}
