//! Steady-state detection on drive-period averages.
//!
//! The driven steady state is a limit cycle, so instantaneous observables
//! never settle. Records are grouped into drive periods [kP, (k+1)P) and
//! averaged; the run is steady once three consecutive period averages of ΔF
//! agree within the tolerance.

use crate::error::{Error, Result};
use crate::lindblad::Trajectory;
use crate::params::SimulationParams;
use crate::thermo::ThermoRecord;

/// Number of consecutive period averages that must agree.
pub const SETTLED_PERIODS: usize = 3;

/// Mean ΔF, ΔS, ΔE over one complete drive period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodAverage {
    pub index: usize,
    /// End of the period, (index + 1)·P.
    pub t_end: f64,
    pub delta_f: f64,
    pub delta_s: f64,
    pub delta_e: f64,
}

/// Incremental period averager fed one record at a time.
#[derive(Debug, Clone)]
pub struct PeriodAverager {
    period: f64,
    current: Option<usize>,
    count: usize,
    sums: [f64; 3],
    averages: Vec<PeriodAverage>,
}

impl PeriodAverager {
    pub fn new(period: f64) -> Self {
        Self {
            period,
            current: None,
            count: 0,
            sums: [0.0; 3],
            averages: Vec::new(),
        }
    }

    fn bucket(&self, t: f64) -> usize {
        (t / self.period + 1e-9).floor() as usize
    }

    /// Adds a record; returns true when it closes a period.
    pub fn push(&mut self, rec: &ThermoRecord) -> bool {
        let k = self.bucket(rec.t);
        let mut closed = false;
        match self.current {
            Some(c) if c == k => {}
            Some(c) => {
                // A skipped bucket means no samples; only the contiguous
                // predecessor is a complete period.
                if k == c + 1 && self.count > 0 {
                    let n = self.count as f64;
                    self.averages.push(PeriodAverage {
                        index: c,
                        t_end: (c + 1) as f64 * self.period,
                        delta_f: self.sums[0] / n,
                        delta_s: self.sums[1] / n,
                        delta_e: self.sums[2] / n,
                    });
                    closed = true;
                }
                self.current = Some(k);
                self.count = 0;
                self.sums = [0.0; 3];
            }
            None => self.current = Some(k),
        }
        self.count += 1;
        self.sums[0] += rec.delta_f;
        self.sums[1] += rec.delta_s;
        self.sums[2] += rec.delta_e;
        closed
    }

    pub fn averages(&self) -> &[PeriodAverage] {
        &self.averages
    }

    /// True when the last [`SETTLED_PERIODS`] averages of ΔF agree pairwise
    /// within `tolerance`.
    pub fn is_steady(&self, tolerance: f64) -> bool {
        let n = self.averages.len();
        if n < SETTLED_PERIODS {
            return false;
        }
        let tail = &self.averages[n - SETTLED_PERIODS..];
        let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
            (lo.min(a.delta_f), hi.max(a.delta_f))
        });
        hi - lo < tolerance
    }
}

/// Period averages of a recorded trajectory.
pub fn period_averages(records: &[ThermoRecord], period: f64) -> Vec<PeriodAverage> {
    let mut avg = PeriodAverager::new(period);
    for r in records {
        avg.push(r);
    }
    avg.averages
}

/// Steady-state summary of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateResult {
    pub n_atoms: usize,
    pub delta_f: f64,
    pub delta_s: f64,
    pub delta_e: f64,
    /// End of the first period at which the steady criterion held.
    pub t_steady: Option<f64>,
    pub converged: bool,
    /// Last integrated time.
    pub t_end: f64,
}

/// Scans `traj` for the first time the period-averaged ΔF settles within
/// `ss_tolerance · ω₀`. Reported values are the averages over the last
/// complete period.
pub fn detect_steady_state(traj: &Trajectory, p: &SimulationParams) -> Result<SteadyStateResult> {
    let period = p.drive_period();
    let t_end = traj.end_time();
    let periods = (t_end / period + 1e-9).floor() as usize;
    if periods < SETTLED_PERIODS {
        return Err(Error::TrajectoryTooShort {
            periods,
            required: SETTLED_PERIODS,
        });
    }
    let tolerance = p.ss_tolerance * p.omega0;
    let mut avg = PeriodAverager::new(period);
    let mut t_steady = None;
    for r in &traj.records {
        if avg.push(r) && t_steady.is_none() && avg.is_steady(tolerance) {
            t_steady = avg.averages().last().map(|a| a.t_end);
        }
    }
    let last = *avg.averages().last().ok_or(Error::TrajectoryTooShort {
        periods: 0,
        required: SETTLED_PERIODS,
    })?;
    Ok(SteadyStateResult {
        n_atoms: p.n_atoms,
        delta_f: last.delta_f,
        delta_s: last.delta_s,
        delta_e: last.delta_e,
        t_steady,
        converged: t_steady.is_some(),
        t_end,
    })
}
