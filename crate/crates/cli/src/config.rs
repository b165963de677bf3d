//! Run configuration files for `simulate` and `energy-audit`.

use std::path::{Path, PathBuf};

use cxlagrange::dynamics::{DriveInput, MachineState, VoltageProfile};
use cxlagrange::models::MagneticLagrangianModel;
use num_complex::Complex64;
use serde::Deserialize;
use toml::Spanned;

use crate::error::CliError;
use crate::machine::{line_of, load_machine};

pub const DEFAULT_DRIFT_BOUND: f64 = 1e-6;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunFile {
    machine: Spanned<String>,
    t_end: Spanned<f64>,
    dt: Spanned<f64>,
    drift_bound: Option<Spanned<f64>>,
    drive: Spanned<DriveBlock>,
    #[serde(default)]
    initial: Option<Spanned<InitialBlock>>,
    #[serde(default)]
    output: OutputBlock,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveBlock {
    #[serde(rename = "tau_L", default)]
    tau_l: f64,
    u_s: VoltageBlock,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum VoltageBlock {
    Constant {
        value: [f64; 2],
    },
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Rows of `[t, re, im]`.
    Table {
        points: Vec<[f64; 3]>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialBlock {
    #[serde(default)]
    theta: f64,
    #[serde(default)]
    omega: f64,
    #[serde(default)]
    i_s: [f64; 2],
    i_r: Option<[f64; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputBlock {
    trajectory: Option<String>,
    audit: Option<String>,
    summary: Option<String>,
}

/// A validated run configuration with its machine loaded.
#[derive(Debug)]
pub struct RunConfig {
    pub model: MagneticLagrangianModel,
    pub machine_path: PathBuf,
    pub input: DriveInput,
    pub initial: MachineState,
    pub t_end: f64,
    pub dt: f64,
    pub drift_bound: f64,
    pub trajectory_path: PathBuf,
    pub audit_path: PathBuf,
    pub summary_path: PathBuf,
}

fn c(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// Loads a run file. Relative machine paths are resolved against the run
/// file's directory; relative output paths against `output_dir` when given,
/// otherwise against the run file's directory.
pub fn load_run(path: &Path, output_dir: Option<&Path>) -> Result<RunConfig, CliError> {
    let origin = path.display().to_string();
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{origin}: cannot read run file: {e}")))?;
    let file: RunFile = toml::from_str(&text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
    let at = |span: std::ops::Range<usize>, msg: String| {
        CliError::Config(format!("{origin}:{}: {msg}", line_of(&text, span.start)))
    };

    let dt = *file.dt.get_ref();
    if !(dt.is_finite() && dt > 0.0) {
        return Err(at(file.dt.span(), format!("dt must be positive and finite, got {dt}")));
    }
    let t_end = *file.t_end.get_ref();
    if !(t_end.is_finite() && t_end >= dt) {
        return Err(at(
            file.t_end.span(),
            format!("t_end must be finite and >= dt = {dt}, got {t_end}"),
        ));
    }
    let drift_bound = match &file.drift_bound {
        Some(b) if !(b.get_ref().is_finite() && *b.get_ref() > 0.0) => {
            return Err(at(
                b.span(),
                format!("drift_bound must be positive, got {}", b.get_ref()),
            ))
        }
        Some(b) => *b.get_ref(),
        None => DEFAULT_DRIFT_BOUND,
    };

    let base = path.parent().unwrap_or(Path::new("."));
    let machine_path = base.join(file.machine.get_ref());
    if !machine_path.is_file() {
        return Err(at(
            file.machine.span(),
            format!("machine file {} does not exist", machine_path.display()),
        ));
    }
    let model = load_machine(&machine_path)?;

    let drive = file.drive.get_ref();
    let u_s = match &drive.u_s {
        VoltageBlock::Constant { value } => VoltageProfile::Constant(c(*value)),
        VoltageBlock::Sinusoid {
            amplitude,
            frequency,
            phase,
        } => VoltageProfile::Sinusoid {
            amplitude: *amplitude,
            frequency: *frequency,
            phase: *phase,
        },
        VoltageBlock::Table { points } => {
            VoltageProfile::Table(points.iter().map(|r| (r[0], Complex64::new(r[1], r[2]))).collect())
        }
    };
    let input = DriveInput {
        u_s,
        tau_l: drive.tau_l,
    };
    input
        .validate()
        .map_err(|e| at(file.drive.span(), format!("drive: {e}")))?;

    let initial = match &file.initial {
        None => MachineState::zero(&model),
        Some(block) => {
            let b = block.get_ref();
            let state = match (model.n_currents(), b.i_r) {
                (1, None) => MachineState::pm(b.theta, b.omega, c(b.i_s)),
                (2, i_r) => MachineState::im(b.theta, b.omega, c(i_r.unwrap_or([0.0, 0.0])), c(b.i_s)),
                _ => return Err(at(block.span(), format!("{} has no rotor current i_r", model.kind()))),
            };
            state
                .check(&model)
                .map_err(|e| at(block.span(), format!("initial: {e}")))?;
            state
        }
    };

    let out_base = output_dir.map(Path::to_path_buf).unwrap_or_else(|| base.to_path_buf());
    let out = |name: &Option<String>, default: &str| out_base.join(name.as_deref().unwrap_or(default));
    Ok(RunConfig {
        model,
        machine_path,
        input,
        initial,
        t_end,
        dt,
        drift_bound,
        trajectory_path: out(&file.output.trajectory, "trajectory.csv"),
        audit_path: out(&file.output.audit, "audit.csv"),
        summary_path: out(&file.output.summary, "audit_summary.txt"),
    })
}
