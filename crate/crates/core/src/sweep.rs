//! Grid sweeps over N (and optionally γ, A, n̄), steady-state collection and
//! the optimal battery size.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lindblad::integrate_until_steady;
use crate::params::SimulationParams;
use crate::steady::SteadyStateResult;

/// What `find_optimal_n` maximises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    #[default]
    DeltaF,
    DeltaFPerAtom,
}

impl Objective {
    pub fn evaluate(self, r: &SteadyStateResult) -> f64 {
        match self {
            Objective::DeltaF => r.delta_f,
            Objective::DeltaFPerAtom => r.delta_f / r.n_atoms as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::DeltaF => "delta_f",
            Objective::DeltaFPerAtom => "delta_f_per_atom",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "delta_f" => Ok(Objective::DeltaF),
            "delta_f_per_atom" => Ok(Objective::DeltaFPerAtom),
            other => Err(format!(
                "unknown objective `{other}` (expected delta_f or delta_f_per_atom)"
            )),
        }
    }
}

/// A sweep grid. Empty value lists fall back to the base parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: SimulationParams,
    pub n_min: usize,
    pub n_max: usize,
    pub gamma_values: Vec<f64>,
    pub amplitude_values: Vec<f64>,
    pub nbar_values: Vec<f64>,
    pub objective: Objective,
    /// Use this step everywhere instead of the per-point automatic one.
    pub fixed_dt: Option<f64>,
}

impl SweepSpec {
    pub fn new(base: SimulationParams, n_min: usize, n_max: usize) -> Self {
        Self {
            base,
            n_min,
            n_max,
            gamma_values: Vec::new(),
            amplitude_values: Vec::new(),
            nbar_values: Vec::new(),
            objective: Objective::DeltaF,
            fixed_dt: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::InvalidParameter {
                key: "sweep.n_min",
                reason: format!("need 1 <= n_min <= n_max, got {}..={}", self.n_min, self.n_max),
            });
        }
        for (key, list) in [
            ("sweep.gamma_list", &self.gamma_values),
            ("sweep.amplitude_list", &self.amplitude_values),
            ("sweep.nbar_list", &self.nbar_values),
        ] {
            if let Some(v) = list.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidParameter {
                    key,
                    reason: format!("values must be non-negative, got {v}"),
                });
            }
        }
        for combo in self.combinations() {
            self.point_params(combo, self.n_max).validate()?;
        }
        Ok(())
    }

    fn values_or(list: &[f64], default: f64) -> Vec<f64> {
        if list.is_empty() {
            vec![default]
        } else {
            list.to_vec()
        }
    }

    /// (γ, A, n̄) combinations in γ-major order.
    pub fn combinations(&self) -> Vec<ParamKey> {
        let mut out = Vec::new();
        for &gamma in &Self::values_or(&self.gamma_values, self.base.gamma) {
            for &amplitude in &Self::values_or(&self.amplitude_values, self.base.amplitude) {
                for &nbar in &Self::values_or(&self.nbar_values, self.base.nbar) {
                    out.push(ParamKey {
                        gamma,
                        amplitude,
                        nbar,
                    });
                }
            }
        }
        out
    }

    /// Parameters of one grid point.
    pub fn point_params(&self, key: ParamKey, n_atoms: usize) -> SimulationParams {
        let p = SimulationParams {
            gamma: key.gamma,
            amplitude: key.amplitude,
            nbar: key.nbar,
            n_atoms,
            ..self.base
        };
        match self.fixed_dt {
            Some(dt) => SimulationParams { dt, ..p },
            None => p.with_auto_dt(),
        }
    }
}

/// Identifies one curve of the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamKey {
    pub gamma: f64,
    pub amplitude: f64,
    pub nbar: f64,
}

/// One grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub n_atoms: usize,
    pub key: ParamKey,
    pub result: Result<SteadyStateResult>,
    /// True if the point was rerun at twice the horizon.
    pub extended: bool,
}

/// Optimum of one (γ, A, n̄) curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub key: ParamKey,
    pub n_opt: Result<usize>,
    pub objective_value: Option<f64>,
    /// Sign changes of the first differences outside the tolerance band.
    pub sign_changes: usize,
    /// Exactly one sign change; violations are flagged, not fatal.
    pub unimodal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub objective: Objective,
    /// Ordered by (γ, A, n̄) combination, then N.
    pub entries: Vec<SweepEntry>,
    pub summaries: Vec<SweepSummary>,
}

/// Steady state from the Gibbs start; one retry at 2·t_max if the first
/// horizon was too short.
pub fn steady_state_run(p: &SimulationParams) -> Result<(SteadyStateResult, bool)> {
    let (_, first) = integrate_until_steady(p)?;
    if first.converged {
        return Ok((first, false));
    }
    let longer = SimulationParams {
        t_max: 2.0 * p.t_max,
        ..*p
    };
    let (_, second) = integrate_until_steady(&longer)?;
    Ok((second, true))
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let grid: Vec<(ParamKey, usize)> = spec
        .combinations()
        .into_iter()
        .flat_map(|key| (spec.n_min..=spec.n_max).map(move |n| (key, n)))
        .collect();

    let entries: Vec<SweepEntry> = grid
        .par_iter()
        .map(|&(key, n)| {
            let p = spec.point_params(key, n);
            let outcome = steady_state_run(&p);
            if let Err(e) = &outcome {
                log::warn!("sweep point N={n} gamma={} A={} nbar={}: {e}", key.gamma, key.amplitude, key.nbar);
            }
            let extended = matches!(outcome, Ok((_, true)));
            SweepEntry {
                n_atoms: n,
                key,
                result: outcome.map(|(r, _)| r),
                extended,
            }
        })
        .collect();

    let band = spec.base.ss_tolerance * spec.base.omega0;
    let summaries = spec
        .combinations()
        .into_iter()
        .map(|key| summarize(&entries, key, spec.objective, band))
        .collect();

    Ok(SweepResult {
        objective: spec.objective,
        entries,
        summaries,
    })
}

fn curve(entries: &[SweepEntry], key: ParamKey, objective: Objective) -> Vec<(usize, f64)> {
    entries
        .iter()
        .filter(|e| e.key == key)
        .filter_map(|e| e.result.as_ref().ok().map(|r| (e.n_atoms, objective.evaluate(r))))
        .collect()
}

/// Argmax of the objective over the entries of `key`, ties to the smaller N.
///
/// Every successfully integrated entry takes part, converged or not: at
/// γ = 0 no point ever settles, and the optimum is still the largest N.
pub fn find_optimal_n(entries: &[SweepEntry], key: ParamKey, objective: Objective) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (n, v) in curve(entries, key, objective) {
        match best {
            Some((bn, bv)) if v < bv || (v == bv && n > bn) => {}
            _ => best = Some((n, v)),
        }
    }
    best.ok_or(Error::NoUsableEntries {
        gamma: key.gamma,
        amplitude: key.amplitude,
        nbar: key.nbar,
    })
}

/// Sign changes in the first differences of `values`, ignoring steps
/// smaller than `band`.
pub fn count_sign_changes(values: &[f64], band: f64) -> usize {
    let signs: Vec<bool> = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| d.abs() > band)
        .map(|d| d > 0.0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn summarize(entries: &[SweepEntry], key: ParamKey, objective: Objective, band: f64) -> SweepSummary {
    let values: Vec<f64> = curve(entries, key, objective).into_iter().map(|(_, v)| v).collect();
    let sign_changes = count_sign_changes(&values, band);
    let opt = find_optimal_n(entries, key, objective);
    let unimodal = sign_changes == 1;
    if key.gamma > 0.0 && !unimodal {
        log::warn!(
            "objective over N is not unimodal for gamma={} A={} nbar={} ({sign_changes} sign changes)",
            key.gamma,
            key.amplitude,
            key.nbar
        );
    }
    SweepSummary {
        key,
        objective_value: opt.as_ref().ok().map(|&(_, v)| v),
        n_opt: opt.map(|(n, _)| n),
        sign_changes,
        unimodal,
    }
}

/// Collective N-atom battery against N independently charged atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelComparison {
    pub n_atoms: usize,
    pub collective_delta_f: f64,
    /// N × single-atom ΔF.
    pub parallel_delta_f: f64,
    pub collective_delta_s: f64,
    /// N × single-atom ΔS.
    pub parallel_delta_s: f64,
    pub collective_converged: bool,
    pub single_converged: bool,
}

pub fn parallel_comparison(n_atoms: usize, base: &SimulationParams) -> Result<ParallelComparison> {
    if n_atoms == 0 {
        return Err(Error::InvalidParameter {
            key: "n_atoms",
            reason: "must be at least 1".into(),
        });
    }
    let collective_p = base.with_n_atoms(n_atoms).with_auto_dt();
    let single_p = base.with_n_atoms(1).with_auto_dt();
    let (collective, single) = rayon::join(
        || steady_state_run(&collective_p),
        || steady_state_run(&single_p),
    );
    let ((collective, _), (single, _)) = (collective?, single?);
    let n = n_atoms as f64;
    Ok(ParallelComparison {
        n_atoms,
        collective_delta_f: collective.delta_f,
        parallel_delta_f: n * single.delta_f,
        collective_delta_s: collective.delta_s,
        parallel_delta_s: n * single.delta_s,
        collective_converged: collective.converged,
        single_converged: single.converged,
    })
}
