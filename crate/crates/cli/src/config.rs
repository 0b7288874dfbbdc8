//! Run configuration: built-in defaults, then a TOML file, then flags.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};

use qbat_core::{Objective, SimulationParams, SweepSpec};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Sweep,
    Oracle,
    HpCompare,
    ParallelCompare,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Sweep => "sweep",
            Mode::Oracle => "oracle",
            Mode::HpCompare => "hp-compare",
            Mode::ParallelCompare => "parallel-compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveName {
    #[value(name = "delta_f")]
    DeltaF,
    #[value(name = "delta_f_per_atom")]
    DeltaFPerAtom,
}

impl From<ObjectiveName> for Objective {
    fn from(o: ObjectiveName) -> Self {
        match o {
            ObjectiveName::DeltaF => Objective::DeltaF,
            ObjectiveName::DeltaFPerAtom => Objective::DeltaFPerAtom,
        }
    }
}

/// Contents of a config file; every key optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub mode: Option<Mode>,
    pub omega0: Option<f64>,
    pub omega: Option<f64>,
    pub amplitude: Option<f64>,
    pub gamma: Option<f64>,
    pub nbar: Option<f64>,
    pub n_atoms: Option<usize>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub record_stride: Option<usize>,
    pub ss_tolerance: Option<f64>,
    pub positivity_tolerance: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub sweep: Option<SweepFile>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    pub gamma_list: Option<Vec<f64>>,
    pub amplitude_list: Option<Vec<f64>>,
    pub nbar_list: Option<Vec<f64>>,
    pub objective: Option<ObjectiveName>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().trim().to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

/// Command-line overrides, one long flag per config key.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub nbar: Option<f64>,
    #[arg(long, alias = "n_atoms")]
    pub n_atoms: Option<usize>,
    #[arg(long, alias = "t_max")]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, alias = "record_stride")]
    pub record_stride: Option<usize>,
    #[arg(long, alias = "ss_tolerance")]
    pub ss_tolerance: Option<f64>,
    #[arg(long, alias = "positivity_tolerance")]
    pub positivity_tolerance: Option<f64>,
    #[arg(long, alias = "output_dir")]
    pub output_dir: Option<PathBuf>,
    #[arg(long, alias = "n_min")]
    pub n_min: Option<usize>,
    #[arg(long, alias = "n_max")]
    pub n_max: Option<usize>,
    #[arg(long, alias = "gamma_list", value_delimiter = ',', num_args = 1..)]
    pub gamma_list: Option<Vec<f64>>,
    #[arg(long, alias = "amplitude_list", value_delimiter = ',', num_args = 1..)]
    pub amplitude_list: Option<Vec<f64>>,
    #[arg(long, alias = "nbar_list", value_delimiter = ',', num_args = 1..)]
    pub nbar_list: Option<Vec<f64>>,
    #[arg(long)]
    pub objective: Option<ObjectiveName>,
}

/// Fully resolved configuration. Serializes to a config file that resolves
/// back to itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub omega0: f64,
    pub omega: f64,
    pub amplitude: f64,
    pub gamma: f64,
    pub nbar: f64,
    pub n_atoms: usize,
    pub t_max: f64,
    /// None selects the automatic step (per N in sweeps).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub record_stride: usize,
    pub ss_tolerance: f64,
    pub positivity_tolerance: f64,
    pub output_dir: PathBuf,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub gamma_list: Vec<f64>,
    pub amplitude_list: Vec<f64>,
    pub nbar_list: Vec<f64>,
    pub objective: ObjectiveName,
}

pub const DEFAULT_OUTPUT_DIR: &str = "qbat-output";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Default,
    File,
    Flag,
}

impl Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Source::Default => "default",
            Source::File => "file",
            Source::Flag => "flag",
        })
    }
}

fn layer<T>(file: Option<T>, flag: Option<T>) -> (Option<T>, Source) {
    match (flag, file) {
        (Some(v), _) => (Some(v), Source::Flag),
        (None, Some(v)) => (Some(v), Source::File),
        (None, None) => (None, Source::Default),
    }
}

fn pick<T: std::fmt::Debug>(key: &str, default: T, file: Option<T>, flag: Option<T>) -> T {
    let (v, src) = layer(file, flag);
    let v = v.unwrap_or(default);
    info!("{key} = {v:?} ({src})");
    v
}

/// Layers `file` and `flags` over the built-in defaults. Every resolved
/// value is logged with its source.
pub fn resolve(file: Option<ConfigFile>, flags: &Flags) -> CliResult<RunConfig> {
    let file = file.unwrap_or_default();
    let sweep_file = file.sweep.clone().unwrap_or_default();
    let d = SimulationParams::default();

    let (mode, src) = layer(file.mode, flags.mode);
    let mode = mode.ok_or_else(|| {
        CliError::Config(format!(
            "missing required key `mode` (one of {})",
            Mode::value_variants().iter().map(|m| m.name()).collect::<Vec<_>>().join(", ")
        ))
    })?;
    info!("mode = {} ({src})", mode.name());

    let (dt, src) = layer(file.dt, flags.dt);
    match dt {
        Some(v) => info!("dt = {v:?} ({src})"),
        None => info!("dt = auto ({src})"),
    }

    let cfg = RunConfig {
        mode,
        omega0: pick("omega0", d.omega0, file.omega0, flags.omega0),
        omega: pick("omega", d.omega, file.omega, flags.omega),
        amplitude: pick("amplitude", d.amplitude, file.amplitude, flags.amplitude),
        gamma: pick("gamma", d.gamma, file.gamma, flags.gamma),
        nbar: pick("nbar", d.nbar, file.nbar, flags.nbar),
        n_atoms: pick("n_atoms", d.n_atoms, file.n_atoms, flags.n_atoms),
        t_max: pick("t_max", d.t_max, file.t_max, flags.t_max),
        dt,
        record_stride: pick("record_stride", d.record_stride, file.record_stride, flags.record_stride),
        ss_tolerance: pick("ss_tolerance", d.ss_tolerance, file.ss_tolerance, flags.ss_tolerance),
        positivity_tolerance: pick(
            "positivity_tolerance",
            d.positivity_tolerance,
            file.positivity_tolerance,
            flags.positivity_tolerance,
        ),
        output_dir: pick(
            "output_dir",
            PathBuf::from(DEFAULT_OUTPUT_DIR),
            file.output_dir,
            flags.output_dir.clone(),
        ),
        sweep: SweepConfig {
            n_min: pick("sweep.n_min", 1, sweep_file.n_min, flags.n_min),
            n_max: pick("sweep.n_max", 30, sweep_file.n_max, flags.n_max),
            gamma_list: pick("sweep.gamma_list", Vec::new(), sweep_file.gamma_list, flags.gamma_list.clone()),
            amplitude_list: pick(
                "sweep.amplitude_list",
                Vec::new(),
                sweep_file.amplitude_list,
                flags.amplitude_list.clone(),
            ),
            nbar_list: pick("sweep.nbar_list", Vec::new(), sweep_file.nbar_list, flags.nbar_list.clone()),
            objective: pick("sweep.objective", ObjectiveName::DeltaF, sweep_file.objective, flags.objective),
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Physical parameters, with the automatic step when `dt` is unset.
    pub fn params(&self) -> SimulationParams {
        let p = SimulationParams {
            omega0: self.omega0,
            omega: self.omega,
            amplitude: self.amplitude,
            gamma: self.gamma,
            nbar: self.nbar,
            n_atoms: self.n_atoms,
            t_max: self.t_max,
            dt: self.dt.unwrap_or(f64::NAN),
            record_stride: self.record_stride,
            ss_tolerance: self.ss_tolerance,
            positivity_tolerance: self.positivity_tolerance,
        };
        match self.dt {
            Some(_) => p,
            None => p.with_auto_dt(),
        }
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            base: self.params(),
            n_min: self.sweep.n_min,
            n_max: self.sweep.n_max,
            gamma_values: self.sweep.gamma_list.clone(),
            amplitude_values: self.sweep.amplitude_list.clone(),
            nbar_values: self.sweep.nbar_list.clone(),
            objective: self.sweep.objective.into(),
            fixed_dt: self.dt,
        }
    }

    /// Rejects invalid physics before anything runs, naming the key.
    pub fn validate(&self) -> CliResult<()> {
        self.params().validate()?;
        match self.mode {
            Mode::Sweep => self.sweep_spec().validate()?,
            Mode::ParallelCompare => {
                if self.sweep.n_min == 0 || self.sweep.n_min > self.sweep.n_max {
                    return Err(CliError::Config(format!(
                        "invalid parameter `sweep.n_min`: need 1 <= n_min <= n_max, got {}..{}",
                        self.sweep.n_min, self.sweep.n_max
                    )));
                }
            }
            Mode::Oracle if self.n_atoms != 1 => {
                return Err(CliError::Config(format!(
                    "invalid parameter `n_atoms`: oracle mode needs n_atoms = 1, got {}",
                    self.n_atoms
                )));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("RunConfig is plain data")
    }
}
