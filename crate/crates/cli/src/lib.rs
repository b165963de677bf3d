//! Command-line front end for `cxlagrange`.
//!
//! Exit codes: 0 success, 1 output write failure, 2 invalid input file or
//! flag, 3 integration stopped early, 4 full-rank sample in an observability
//! sweep, 5 failed validation suite, 6 energy drift above the bound.

pub mod config;
pub mod error;
pub mod machine;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use cxlagrange::checks::{validate_model, AnalyticOracle, ClosedForms, ValidationOptions};
use cxlagrange::dynamics::simulate;
use cxlagrange::energy::power_balance_audit;
use cxlagrange::models::MagneticLagrangianModel;
use cxlagrange::observability::{verify_prop1, Prop1Summary, SweepOptions};
use cxlagrange::Error;

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "cxlagrange",
    version,
    about = "Electrical machines from complex-current Lagrangians"
)]
pub struct Cli {
    /// Directory for output files.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Seed for random sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of observability samples.
    #[arg(long, global = true, default_value_t = 20)]
    pub samples: usize,
    /// Suppress reports on standard output.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a run file and write the trajectory CSV.
    Simulate { config: PathBuf },
    /// Rank test at random zero-frequency steady states.
    Observability { machine: PathBuf },
    /// Check a machine against closed forms, periodicity and power balance.
    Validate { machine: PathBuf },
    /// Integrate a run file and audit its power balance.
    EnergyAudit { config: PathBuf },
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

pub type SweepFn = fn(&MagneticLagrangianModel, &SweepOptions) -> cxlagrange::Result<Prop1Summary>;

/// Replaceable analysis back ends, for negative-control tests.
pub struct Hooks<'a> {
    /// Closed forms checked by `validate`.
    pub oracle: &'a dyn AnalyticOracle,
    /// Rank sweep run by `observability`.
    pub sweep: SweepFn,
}

impl Default for Hooks<'static> {
    fn default() -> Self {
        Self {
            oracle: &ClosedForms,
            sweep: verify_prop1,
        }
    }
}

/// Runs one command, writing reports to `out` unless `--quiet`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    run_with(cli, &Hooks::default(), out)
}

pub fn run_with(cli: &Cli, hooks: &Hooks, out: &mut dyn Write) -> Result<(), CliError> {
    let mut report = |text: &str| -> Result<(), CliError> {
        if !cli.quiet {
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
        }
        Ok(())
    };
    let out_dir = cli.output_dir.as_deref();
    match &cli.command {
        Command::Simulate { config } => {
            let run = config::load_run(config, out_dir)?;
            let (traj, failure) = match simulate(&run.model, &run.initial, &run.input, run.t_end, run.dt) {
                Ok(t) => (t, None),
                Err(f) => {
                    let msg = f.to_string();
                    (f.partial, Some(msg))
                }
            };
            let mut buf = Vec::new();
            traj.write_csv(&mut buf).map_err(|e| io_err(&run.trajectory_path, e))?;
            write_file(&run.trajectory_path, &buf)?;
            if let Some(msg) = failure {
                return Err(CliError::Runtime(format!(
                    "simulation stopped: {msg}; partial trajectory written to {}",
                    run.trajectory_path.display()
                )));
            }
            report(&format!(
                "wrote {} rows to {}\n",
                traj.len(),
                run.trajectory_path.display()
            ))
        }
        Command::Observability { machine } => {
            let model = machine::load_machine(machine)?;
            if cli.samples == 0 {
                return Err(CliError::Config("--samples must be at least 1".into()));
            }
            let opts = SweepOptions {
                samples: cli.samples,
                seed: cli.seed,
                ..Default::default()
            };
            let summary = (hooks.sweep)(&model, &opts).map_err(|e| match e {
                Error::PropositionViolation { .. } => CliError::Proposition(e.to_string()),
                other => CliError::Runtime(other.to_string()),
            })?;
            let text = summary.to_text();
            if let Some(dir) = out_dir {
                write_file(&dir.join("observability.txt"), text.as_bytes())?;
                write_file(&dir.join("observability.csv"), summary.to_csv().as_bytes())?;
            }
            report(&text)
        }
        Command::Validate { machine } => {
            let model = machine::load_machine(machine)?;
            let opts = ValidationOptions {
                seed: cli.seed,
                ..Default::default()
            };
            let results = validate_model(&model, hooks.oracle, &opts);
            let mut text = format!("kind: {}\n", model.kind());
            for r in &results {
                text.push_str(&r.line());
                text.push('\n');
            }
            if let Some(dir) = out_dir {
                write_file(&dir.join("validate.txt"), text.as_bytes())?;
            }
            report(&text)?;
            let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Validation(format!("failed suites: {}", failed.join(", "))))
            }
        }
        Command::EnergyAudit { config } => {
            let run = config::load_run(config, out_dir)?;
            let traj = simulate(&run.model, &run.initial, &run.input, run.t_end, run.dt)
                .map_err(|f| CliError::Runtime(format!("simulation stopped: {f}")))?;
            let audit =
                power_balance_audit(&run.model, &traj, &run.input).map_err(|e| CliError::Runtime(e.to_string()))?;
            let mut buf = Vec::new();
            audit.write_csv(&mut buf).map_err(|e| io_err(&run.audit_path, e))?;
            write_file(&run.audit_path, &buf)?;
            let ok = audit.relative_drift <= run.drift_bound;
            let summary = format!(
                "{}drift_bound: {:.6e}\nverdict: {}\n",
                audit.summary(),
                run.drift_bound,
                if ok { "pass" } else { "fail" }
            );
            write_file(&run.summary_path, summary.as_bytes())?;
            report(&summary)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Drift(format!(
                    "relative drift {:.3e} exceeds bound {:.3e}",
                    audit.relative_drift, run.drift_bound
                )))
            }
        }
    }
}
