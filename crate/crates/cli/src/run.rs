//! Mode dispatch. Physics is delegated to the core crate.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use log::{info, warn};

use qbat_core::analytic::{energy_closed_form, fit_oscillation_frequency, gibbs_sigma_z, integrate_bloch, rabi_frequency};
use qbat_core::lindblad::initial_gibbs_state;
use qbat_core::steady::period_averages;
use qbat_core::{
    build_collective, detect_steady_state, integrate, integrate_hp_adaptive, parallel_comparison,
    run_sweep, SimulationParams, Trajectory,
};

use crate::config::{resolve, ConfigFile, Flags, Mode, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{
    write_artifact, write_hp_compare, write_oracle, write_oracle_summary, write_parallel_compare,
    write_sweep, write_trajectory, OracleReport, OracleRow,
};

#[derive(Debug, Parser)]
#[command(name = "qbat", version, about = "Charging simulator for collective quantum batteries")]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub flags: Flags,
}

/// Starting Fock truncation for the bosonic model.
const HP_START_TRUNCATION: usize = 8;

/// Parses `args`, resolves the config and runs it; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match load_and_run(&cli) {
        Ok(paths) => {
            for p in paths {
                info!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            log::error!("{e}");
            eprintln!("qbat: {e}");
            e.exit_code()
        }
    }
}

fn load_and_run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let file = cli.config.as_deref().map(ConfigFile::load).transpose()?;
    let cfg = resolve(file, &cli.flags)?;
    execute(&cfg)
}

/// Runs the configured mode and returns the files written.
pub fn execute(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    match cfg.mode {
        Mode::Simulate => simulate(cfg),
        Mode::Sweep => sweep(cfg),
        Mode::Oracle => oracle(cfg),
        Mode::HpCompare => hp_compare(cfg),
        Mode::ParallelCompare => parallel(cfg),
    }
}

fn table(cfg: &RunConfig, stem: &str) -> PathBuf {
    cfg.output_dir.join(format!("{stem}.csv"))
}

fn with_meta(path: PathBuf) -> [PathBuf; 2] {
    let meta = crate::output::meta_path(&path);
    [path, meta]
}

fn gibbs_run(p: &SimulationParams) -> CliResult<Trajectory> {
    let ops = build_collective(p.n_atoms)?;
    Ok(integrate(p, &ops, &initial_gibbs_state(p, &ops))?)
}

fn simulate(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let p = cfg.params();
    let traj = gibbs_run(&p)?;
    match detect_steady_state(&traj, &p) {
        Ok(ss) if ss.converged => info!(
            "steady at t = {:.6}: deltaF = {:.10}, deltaS = {:.10}, deltaE = {:.10}",
            ss.t_steady.unwrap_or(f64::NAN),
            ss.delta_f,
            ss.delta_s,
            ss.delta_e
        ),
        Ok(_) => info!("no steady state within t_max = {}", p.t_max),
        Err(e) => info!("steady-state check skipped: {e}"),
    }
    let path = table(cfg, "trajectory");
    write_artifact(cfg, &path, |w| write_trajectory(w, &traj))?;
    Ok(with_meta(path).into())
}

fn sweep(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let result = run_sweep(&cfg.sweep_spec())?;
    for s in &result.summaries {
        if let Ok(n) = &s.n_opt {
            info!(
                "gamma={} A={} nbar={}: n_opt = {n}, {} = {:.10}",
                s.key.gamma,
                s.key.amplitude,
                s.key.nbar,
                result.objective.name(),
                s.objective_value.unwrap_or(f64::NAN)
            );
        }
    }
    let path = table(cfg, "sweep");
    write_artifact(cfg, &path, |w| write_sweep(w, &result))?;
    // The table is written either way; a numerical breach at any point
    // still fails the run.
    if let Some(e) = result
        .entries
        .iter()
        .filter_map(|e| e.result.as_ref().err())
        .find(|e| e.is_numerical())
    {
        return Err(CliError::Numerical(e.clone()));
    }
    Ok(with_meta(path).into())
}

/// Baseline for the peak fit: ⟨E⟩ over the last complete drive period.
fn late_mean_energy(traj: &Trajectory) -> Option<f64> {
    let e0 = traj.records.first()?.energy;
    period_averages(&traj.records, traj.drive_period)
        .last()
        .map(|a| a.delta_e + e0)
}

pub fn oracle_report(p: &SimulationParams) -> CliResult<OracleReport> {
    if p.n_atoms != 1 {
        return Err(CliError::Config(format!(
            "invalid parameter `n_atoms`: oracle mode needs n_atoms = 1, got {}",
            p.n_atoms
        )));
    }
    let traj = gibbs_run(p)?;
    let bloch = integrate_bloch(p, gibbs_sigma_z(p))?;
    // Both integrators sample the same grid.
    debug_assert_eq!(bloch.len(), traj.records.len());
    let rows = traj
        .records
        .iter()
        .zip(&bloch)
        .map(|(r, b)| OracleRow {
            t: r.t,
            e_full: r.energy,
            e_closed: energy_closed_form(r.t, p),
            e_bloch: 0.5 * p.omega0 * b.sz,
        })
        .collect::<Vec<_>>();
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let energies: Vec<f64> = rows.iter().map(|r| r.e_full).collect();
    let rabi_fitted = late_mean_energy(&traj).and_then(|base| {
        fit_oscillation_frequency(&times, &energies, p.drive_period(), base, 1e-5 * p.omega0)
    });
    Ok(OracleReport {
        omega0: p.omega0,
        rows,
        rabi_analytic: rabi_frequency(p.amplitude, p.gamma, p.nbar).value(),
        rabi_fitted,
    })
}

fn oracle(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let report = oracle_report(&cfg.params())?;
    info!(
        "max |E_full - E_closed| = {:.3e}, max |E_full - E_bloch| = {:.3e}, Rabi fitted {:?} vs analytic {:?}",
        report.max_deviation_closed(),
        report.max_deviation_bloch(),
        report.rabi_fitted,
        report.rabi_analytic
    );
    let path = table(cfg, "oracle");
    let summary = table(cfg, "oracle_summary");
    write_artifact(cfg, &path, |w| write_oracle(w, &report))?;
    write_artifact(cfg, &summary, |w| write_oracle_summary(w, &report))?;
    Ok(with_meta(path).into_iter().chain(with_meta(summary)).collect())
}

fn hp_compare(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let p = cfg.params();
    let dicke = gibbs_run(&p)?;
    let (hp, truncation) = integrate_hp_adaptive(&p, HP_START_TRUNCATION)?;
    let horizon = 0.5 / (p.gamma * p.n_atoms as f64 * p.chi());
    info!("Fock truncation M = {truncation}; linear-regime horizon 0.5/(gamma N chi) = {horizon:.6}");
    let path = table(cfg, "hp_compare");
    write_artifact(cfg, &path, |w| write_hp_compare(w, &dicke, &hp, p.n_atoms, p.omega0))?;
    Ok(with_meta(path).into())
}

fn parallel(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let base = cfg.params();
    let rows = (cfg.sweep.n_min..=cfg.sweep.n_max)
        .map(|n| {
            let mut b = base;
            b.n_atoms = n;
            parallel_comparison(n, &b)
        })
        .collect::<Result<Vec<_>, _>>()?;
    for c in rows.iter().filter(|c| !(c.collective_converged && c.single_converged)) {
        warn!("N = {}: steady state not reached within 2 t_max", c.n_atoms);
    }
    let path = table(cfg, "parallel_compare");
    write_artifact(cfg, &path, |w| write_parallel_compare(w, &rows))?;
    Ok(with_meta(path).into())
}
