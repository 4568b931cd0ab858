use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use floquet_cli::{
    analyze_point, emit, log_log_slope, phase_extent, run_point, run_sweep, trajectory_curves, write_curves, CliError,
    Format, GridRange, OutputField, PointConfig, PointRecord, Result, SweepConfig,
};
use floquet_core::model::DriveParams;

#[derive(Parser)]
#[command(
    name = "floquet",
    version,
    about = "Markovianity of periodically driven Lindblad dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One grid point as a single table row.
    Point(CommonArgs),
    /// Sweep over the (ω, E) grid.
    PhaseDiagram(CommonArgs),
    /// Sweep over the (ω, E) grid including the minimal memory time.
    KernelMap(CommonArgs),
    /// Choi eigenvalues of the exact, semigroup and kernel evolutions.
    Trajectory {
        #[command(flatten)]
        common: CommonArgs,
        /// End time in units of the period.
        #[arg(long, default_value_t = 2.0)]
        t_end: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// Memory time; defaults to the minimal one.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Floquet generator, Hamiltonian, jump operators and kernel as JSON.
    Extract(CommonArgs),
    /// Non-Lindbladian extent and largest μ_min for several γ.
    Extent {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated damping rates.
        #[arg(long, value_delimiter = ',', default_value = "0.003,0.01,0.03,0.1")]
        gammas: Vec<f64>,
    },
}

#[derive(Args, Clone)]
struct CommonArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long = "e")]
    e: Option<f64>,
    #[arg(long, value_name = "MIN:MAX:N")]
    omega_range: Option<GridRange>,
    #[arg(long, value_name = "MIN:MAX:N")]
    e_range: Option<GridRange>,
    #[arg(long)]
    x_max: Option<i64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Column drawn by the pgm format.
    #[arg(long)]
    column: Option<String>,
}

impl CommonArgs {
    /// Defaults, then the config file, then flags.
    fn config(&self) -> Result<SweepConfig> {
        let mut cfg = match &self.config {
            Some(p) => SweepConfig::from_file(p)?,
            None => SweepConfig::default(),
        };
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.phi {
            cfg.phi = v;
        }
        if let Some(r) = self.omega_range {
            cfg.omega_range = r;
        }
        if let Some(r) = self.e_range {
            cfg.e_range = r;
        }
        if let Some(v) = self.omega {
            cfg.omega_range = GridRange::single(v);
        }
        if let Some(v) = self.e {
            cfg.e_range = GridRange::single(v);
        }
        if let Some(v) = self.x_max {
            cfg.x_max = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn single_point(&self, cfg: &SweepConfig) -> Result<DriveParams> {
        let (Some(omega), Some(e)) = (self.omega, self.e) else {
            return Err(CliError::Config("--omega and --e are required".into()));
        };
        Ok(DriveParams::new(e, omega, cfg.phi, cfg.gamma)?)
    }

    fn write(&self, bytes: &[u8]) -> Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, bytes)?,
            None => std::io::stdout().write_all(bytes)?,
        }
        Ok(())
    }
}

fn sweep_command(args: &CommonArgs, force_kernel: bool, default_column: &str) -> Result<()> {
    let mut cfg = args.config()?;
    if force_kernel && !cfg.computes_kernel() {
        cfg.outputs.push(OutputField::TauMin);
    }
    let rows = run_sweep(&cfg)?;
    let column = args.column.as_deref().unwrap_or(default_column);
    emit(&rows, args.format, args.out.as_deref(), cfg.grid_shape(), column)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Point(args) => {
            let cfg = args.config()?;
            let p = args.single_point(&cfg)?;
            let row = run_point(&p, &PointConfig::from(&cfg));
            emit(
                &[row],
                args.format,
                args.out.as_deref(),
                (1, 1),
                args.column.as_deref().unwrap_or("mu_min"),
            )
        }
        Command::PhaseDiagram(args) => sweep_command(&args, false, "mu_min"),
        Command::KernelMap(args) => sweep_command(&args, true, "tau_min"),
        Command::Trajectory {
            common,
            t_end,
            samples,
            tau,
        } => {
            let cfg = common.config()?;
            let p = common.single_point(&cfg)?;
            let mut pc = PointConfig::from(&cfg);
            pc.tau_scan.full_scan = true;
            let period = p.period();
            let pts = trajectory_curves(&p, &pc, t_end * period, samples, tau.map(|t| t * period))?;
            let mut buf = Vec::new();
            write_curves(&pts, &mut buf)?;
            common.write(&buf)
        }
        Command::Extract(args) => {
            let cfg = args.config()?;
            let p = args.single_point(&cfg)?;
            let mut pc = PointConfig::from(&cfg);
            pc.compute_kernel = true;
            pc.tau_scan.full_scan = true;
            let a = analyze_point(&p, &pc)?;
            let mut buf = serde_json::to_vec_pretty(&PointRecord::from_analysis(&a))?;
            buf.push(b'\n');
            args.write(&buf)
        }
        Command::Extent { common, gammas } => {
            let base = common.config()?;
            let mut buf = Vec::new();
            let mut max_mus = Vec::new();
            let mut records = Vec::new();
            for &g in &gammas {
                let mut cfg = base.clone();
                cfg.gamma = g;
                cfg.outputs = vec![OutputField::Exists, OutputField::MuMin];
                let ext = phase_extent(&run_sweep(&cfg)?)?;
                max_mus.push(ext.max_mu);
                records.push((g, ext));
            }
            match common.format {
                Format::Json => {
                    let slope = (gammas.len() >= 2).then(|| log_log_slope(&gammas, &max_mus));
                    let body = serde_json::json!({
                        "rows": records.iter().map(|(g, e)| serde_json::json!({
                            "gamma": g, "delta_omega": e.delta_omega, "delta_E": e.delta_e, "max_mu": e.max_mu,
                        })).collect::<Vec<_>>(),
                        "max_mu_slope": slope,
                    });
                    buf = serde_json::to_vec_pretty(&body)?;
                    buf.push(b'\n');
                }
                Format::Csv => {
                    writeln!(buf, "gamma,delta_omega,delta_E,max_mu")?;
                    for (g, e) in &records {
                        writeln!(
                            buf,
                            "{},{},{},{}",
                            floquet_cli::format_g(*g),
                            floquet_cli::format_g(e.delta_omega),
                            floquet_cli::format_g(e.delta_e),
                            floquet_cli::format_g(e.max_mu)
                        )?;
                    }
                    if gammas.len() >= 2 {
                        eprintln!("max_mu log-log slope: {:.4}", log_log_slope(&gammas, &max_mus));
                    }
                }
                Format::Pgm => return Err(CliError::Config("extent supports csv and json".into())),
            }
            common.write(&buf)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
