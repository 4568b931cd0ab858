//! Parameter sweeps and point analyses of the driven dissipative two-level
//! system, with CSV / JSON / PGM output.

pub mod config;
pub mod emit;
pub mod error;
pub mod point;
pub mod report;
pub mod sweep;
pub mod trajectory;

pub use config::{GridRange, OutputField, SweepConfig};
pub use emit::{emit, format_g, read_csv, write_csv, write_json, write_pgm, Format};
pub use error::{CliError, Result};
pub use point::{analyze_point, run_point, PointAnalysis, PointConfig, Status, SweepResultRow};
pub use report::{OperatorRecord, PointRecord};
pub use sweep::{grid_points, log_log_slope, phase_extent, run_sweep, PhaseExtent};
pub use trajectory::{trajectory_curves, write_curves, CurvePoint};
