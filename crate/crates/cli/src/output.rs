//! Comma-delimited tables and metadata sidecars.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qbat_core::sweep::{ParallelComparison, SweepEntry, SweepSummary};
use qbat_core::{SweepResult, Trajectory};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const TRAJECTORY_HEADER: [&str; 14] = [
    "t",
    "E",
    "S",
    "F",
    "deltaF",
    "deltaE",
    "deltaS",
    "W",
    "Q",
    "H_total",
    "eta",
    "first_law_residual",
    "trace_error",
    "min_eigenvalue",
];

pub const SWEEP_HEADER: [&str; 11] = [
    "N",
    "gamma",
    "A",
    "nbar",
    "deltaF_ss",
    "deltaF_ss_per_atom",
    "deltaS_ss",
    "deltaE_ss",
    "t_steady",
    "converged",
    "status",
];

pub const ORACLE_HEADER: [&str; 8] = [
    "t",
    "E_full",
    "E_closed",
    "E_bloch",
    "dev_closed",
    "rel_dev_closed",
    "dev_bloch",
    "rel_dev_bloch",
];

pub const HP_HEADER: [&str; 5] = ["t", "deltaE_dicke", "deltaE_hp", "dev", "rel_dev"];

pub const PARALLEL_HEADER: [&str; 7] = [
    "N",
    "deltaF_collective",
    "deltaF_parallel",
    "deltaS_collective",
    "deltaS_parallel",
    "collective_converged",
    "single_converged",
];

/// 17 significant digits, enough to round-trip any f64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn csv_err(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

pub fn write_trajectory<W: Write>(w: W, traj: &Trajectory) -> std::io::Result<()> {
    let mut out = writer(w);
    out.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    for (r, d) in traj.records.iter().zip(&traj.diagnostics) {
        out.write_record([
            num(r.t),
            num(r.energy),
            num(r.entropy),
            num(r.free_energy),
            num(r.delta_f),
            num(r.delta_e),
            num(r.delta_s),
            num(r.work),
            num(r.heat),
            num(r.total_energy),
            opt_num(r.efficiency),
            num(r.first_law_residual),
            num(d.trace_error),
            num(d.min_eigenvalue),
        ])
        .map_err(csv_err)?;
    }
    out.flush()
}

fn sweep_row(e: &SweepEntry, status: &str) -> Vec<String> {
    let mut row = vec![
        e.n_atoms.to_string(),
        num(e.key.gamma),
        num(e.key.amplitude),
        num(e.key.nbar),
    ];
    match &e.result {
        Ok(r) => row.extend([
            num(r.delta_f),
            num(r.delta_f / e.n_atoms as f64),
            num(r.delta_s),
            num(r.delta_e),
            opt_num(r.t_steady),
            r.converged.to_string(),
            status.to_string(),
        ]),
        Err(err) => {
            row.extend(std::iter::repeat_n(String::new(), 6));
            row.push(format!("error: {err}"));
        }
    }
    row
}

fn summary_row(s: &SweepSummary, entries: &[SweepEntry]) -> Vec<String> {
    let status = if s.unimodal { "n_opt" } else { "n_opt (not unimodal)" };
    let best = s
        .n_opt
        .as_ref()
        .ok()
        .and_then(|&n| entries.iter().find(|e| e.key == s.key && e.n_atoms == n));
    match best {
        Some(e) => sweep_row(e, status),
        None => {
            let mut row = vec![String::new(), num(s.key.gamma), num(s.key.amplitude), num(s.key.nbar)];
            row.extend(std::iter::repeat_n(String::new(), 6));
            row.push("n_opt: none".into());
            row
        }
    }
}

/// One row per grid point, then one summary row per (γ, A, n̄) holding a
/// copy of its optimal point with status `n_opt`.
pub fn write_sweep<W: Write>(w: W, result: &SweepResult) -> std::io::Result<()> {
    let mut out = writer(w);
    out.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for e in &result.entries {
        let status = if e.extended { "ok (extended)" } else { "ok" };
        out.write_record(sweep_row(e, status)).map_err(csv_err)?;
    }
    for s in &result.summaries {
        out.write_record(summary_row(s, &result.entries)).map_err(csv_err)?;
    }
    out.flush()
}

/// Energies of the full model and the two single-atom reference solutions
/// at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRow {
    pub t: f64,
    pub e_full: f64,
    pub e_closed: f64,
    pub e_bloch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub omega0: f64,
    pub rows: Vec<OracleRow>,
    pub rabi_analytic: Option<f64>,
    pub rabi_fitted: Option<f64>,
}

impl OracleReport {
    /// Deviations are normalized by the single-atom energy scale ω₀/2.
    fn scale(&self) -> f64 {
        0.5 * self.omega0
    }

    pub fn max_deviation_closed(&self) -> f64 {
        self.rows.iter().map(|r| (r.e_full - r.e_closed).abs()).fold(0.0, f64::max)
    }

    pub fn max_deviation_bloch(&self) -> f64 {
        self.rows.iter().map(|r| (r.e_full - r.e_bloch).abs()).fold(0.0, f64::max)
    }
}

pub fn write_oracle<W: Write>(w: W, report: &OracleReport) -> std::io::Result<()> {
    let mut out = writer(w);
    out.write_record(ORACLE_HEADER).map_err(csv_err)?;
    let s = report.scale();
    for r in &report.rows {
        let (dc, db) = ((r.e_full - r.e_closed).abs(), (r.e_full - r.e_bloch).abs());
        out.write_record([
            num(r.t),
            num(r.e_full),
            num(r.e_closed),
            num(r.e_bloch),
            num(dc),
            num(dc / s),
            num(db),
            num(db / s),
        ])
        .map_err(csv_err)?;
    }
    out.flush()
}

pub fn write_oracle_summary<W: Write>(w: W, report: &OracleReport) -> std::io::Result<()> {
    let mut out = writer(w);
    out.write_record(["quantity", "value"]).map_err(csv_err)?;
    let s = report.scale();
    let rows = [
        ("rabi_frequency_analytic", opt_num(report.rabi_analytic)),
        ("rabi_frequency_fitted", opt_num(report.rabi_fitted)),
        ("max_dev_closed", num(report.max_deviation_closed())),
        ("max_rel_dev_closed", num(report.max_deviation_closed() / s)),
        ("max_dev_bloch", num(report.max_deviation_bloch())),
        ("max_rel_dev_bloch", num(report.max_deviation_bloch() / s)),
    ];
    for (k, v) in rows {
        out.write_record([k.to_string(), v]).map_err(csv_err)?;
    }
    out.flush()
}

/// ΔE(t) of the Dicke model and its bosonic image; `rel_dev` is the
/// deviation over N·ω₀.
pub fn write_hp_compare<W: Write>(
    w: W,
    dicke: &Trajectory,
    hp: &Trajectory,
    n_atoms: usize,
    omega0: f64,
) -> std::io::Result<()> {
    let mut out = writer(w);
    out.write_record(HP_HEADER).map_err(csv_err)?;
    let scale = n_atoms as f64 * omega0;
    for (a, b) in dicke.records.iter().zip(&hp.records) {
        let dev = (a.delta_e - b.delta_e).abs();
        out.write_record([num(a.t), num(a.delta_e), num(b.delta_e), num(dev), num(dev / scale)])
            .map_err(csv_err)?;
    }
    out.flush()
}

pub fn write_parallel_compare<W: Write>(w: W, rows: &[ParallelComparison]) -> std::io::Result<()> {
    let mut out = writer(w);
    out.write_record(PARALLEL_HEADER).map_err(csv_err)?;
    for c in rows {
        out.write_record([
            c.n_atoms.to_string(),
            num(c.collective_delta_f),
            num(c.parallel_delta_f),
            num(c.collective_delta_s),
            num(c.parallel_delta_s),
            c.collective_converged.to_string(),
            c.single_converged.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()
}

/// Sidecar text: a version comment, then the resolved config, which is
/// itself a valid config file.
pub fn meta_text(cfg: &RunConfig) -> String {
    format!("# qbat {}\n{}", qbat_core::VERSION, cfg.to_toml())
}

pub fn meta_path(table: &Path) -> PathBuf {
    table.with_extension("meta.toml")
}

/// Writes `<dir>/<name>` through `body`, mapping failures to I/O errors.
pub fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

/// Writes a table and its metadata sidecar.
pub fn write_artifact(
    cfg: &RunConfig,
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> CliResult<()> {
    write_file(path, body)?;
    let meta = meta_path(path);
    std::fs::write(&meta, meta_text(cfg)).map_err(|e| CliError::io(meta, e))
}
