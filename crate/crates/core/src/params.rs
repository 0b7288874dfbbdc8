use std::f64::consts::PI;

use crate::dicke::nbar_to_temperature;
use crate::error::{Error, Result};

/// Physical and numerical parameters of one charging run.
///
/// Frequencies are angular; k_B = 1 so temperatures are energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationParams {
    /// Atomic level splitting ω₀.
    pub omega0: f64,
    /// Drive frequency ω.
    pub omega: f64,
    /// Drive amplitude A.
    pub amplitude: f64,
    /// Single-atom dissipation rate γ.
    pub gamma: f64,
    /// Bath occupation n̄ at the drive frequency.
    pub nbar: f64,
    pub n_atoms: usize,
    pub t_max: f64,
    pub dt: f64,
    /// Every `record_stride`-th integrator step is recorded.
    pub record_stride: usize,
    /// Steady-state threshold on period-averaged ΔF, in units of ω₀.
    pub ss_tolerance: f64,
    pub positivity_tolerance: f64,
}

impl Default for SimulationParams {
    /// ω = ω₀ = 2, A = 0.5ω, γ = 0.03ω, n̄ = 0.2, single atom.
    fn default() -> Self {
        let omega = 2.0;
        let gamma = 0.03 * omega;
        let nbar = 0.2;
        Self {
            omega0: omega,
            omega,
            amplitude: 0.5 * omega,
            gamma,
            nbar,
            n_atoms: 1,
            t_max: 200.0,
            dt: auto_time_step(omega, gamma, nbar, 1),
            record_stride: 10,
            ss_tolerance: 1e-6,
            positivity_tolerance: 1e-8,
        }
    }
}

/// Default step: 400 steps per drive period, refined to dt ≤ 1/(40 γ N χ)
/// when dissipation is faster. The step count per period is rounded up to a
/// multiple of 40 so that any record stride dividing 40 samples every period
/// at the same phases.
pub fn auto_time_step(omega: f64, gamma: f64, nbar: f64, n_atoms: usize) -> f64 {
    let period = 2.0 * PI / omega;
    let decay = gamma * n_atoms as f64 * (1.0 + 2.0 * nbar);
    let steps = (40.0 * decay * period).ceil().max(400.0);
    let steps = (steps / 40.0).ceil() * 40.0;
    period / steps
}

impl SimulationParams {
    pub fn drive_period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Bath temperature derived from n̄ at the drive frequency.
    pub fn temperature(&self) -> f64 {
        nbar_to_temperature(self.nbar, self.omega).unwrap_or(0.0)
    }

    /// χ = 1 + 2n̄.
    pub fn chi(&self) -> f64 {
        1.0 + 2.0 * self.nbar
    }

    /// Replaces `dt` by [`auto_time_step`] for the current parameters.
    pub fn with_auto_dt(mut self) -> Self {
        self.dt = auto_time_step(self.omega, self.gamma, self.nbar, self.n_atoms);
        self
    }

    pub fn with_n_atoms(mut self, n_atoms: usize) -> Self {
        self.n_atoms = n_atoms;
        self
    }

    pub fn total_steps(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(key: &'static str, reason: String) -> Result<()> {
            Err(Error::InvalidParameter { key, reason })
        }
        let finite_positive = |x: f64| x.is_finite() && x > 0.0;
        let finite_non_negative = |x: f64| x.is_finite() && x >= 0.0;
        if !finite_positive(self.omega0) {
            return bad("omega0", format!("must be positive, got {}", self.omega0));
        }
        if !finite_positive(self.omega) {
            return bad("omega", format!("must be positive, got {}", self.omega));
        }
        if !finite_non_negative(self.amplitude) {
            return bad("amplitude", format!("must be non-negative, got {}", self.amplitude));
        }
        if !finite_non_negative(self.gamma) {
            return bad("gamma", format!("must be non-negative, got {}", self.gamma));
        }
        if !finite_non_negative(self.nbar) {
            return bad("nbar", format!("must be non-negative, got {}", self.nbar));
        }
        if self.n_atoms == 0 {
            return bad("n_atoms", "must be at least 1".into());
        }
        if !finite_positive(self.t_max) {
            return bad("t_max", format!("must be positive, got {}", self.t_max));
        }
        if !finite_positive(self.dt) {
            return bad("dt", format!("must be positive, got {}", self.dt));
        }
        let max_dt = self.drive_period() / 200.0;
        if self.dt > max_dt * (1.0 + 1e-12) {
            return bad(
                "dt",
                format!("must not exceed (2π/ω)/200 = {max_dt}, got {}", self.dt),
            );
        }
        if self.record_stride == 0 {
            return bad("record_stride", "must be at least 1".into());
        }
        if !finite_positive(self.ss_tolerance) {
            return bad("ss_tolerance", format!("must be positive, got {}", self.ss_tolerance));
        }
        if !finite_positive(self.positivity_tolerance) {
            return bad(
                "positivity_tolerance",
                format!("must be positive, got {}", self.positivity_tolerance),
            );
        }
        Ok(())
    }
}
