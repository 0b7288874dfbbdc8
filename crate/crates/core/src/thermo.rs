//! Thermodynamic bookkeeping for a charging run: internal energy, von Neumann
//! entropy, free energy, work, heat, total energy and efficiency.
//!
//! Sign conventions: `W` is work done on the battery by the drive, `Q` is heat
//! delivered to the bath, so that W = Q + Δ⟨H⟩ along any trajectory.

use crate::dicke::CollectiveOperators;
use crate::error::{Error, Result};
use crate::linalg::{expectation, hermitian_eigenvalues, ComplexMatrix};
use crate::params::SimulationParams;

/// Eigenvalues in [-NEGLIGIBLE_NEGATIVE, 0) are treated as exact zeros.
pub const NEGLIGIBLE_NEGATIVE: f64 = 1e-10;
/// Eigenvalues below -NEGATIVE_LIMIT mean the state is not positive.
pub const NEGATIVE_LIMIT: f64 = 1e-8;
/// |W| below `EFFICIENCY_WORK_FLOOR · ω₀` leaves η undefined.
pub const EFFICIENCY_WORK_FLOOR: f64 = 1e-9;

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoRecord {
    pub t: f64,
    /// E = Tr(H_s ρ)
    pub energy: f64,
    pub entropy: f64,
    /// F = E - T S
    pub free_energy: f64,
    pub delta_f: f64,
    pub delta_e: f64,
    pub delta_s: f64,
    /// Cumulative work done by the drive.
    pub work: f64,
    /// Cumulative heat delivered to the bath.
    pub heat: f64,
    /// ⟨H(t)⟩ including the drive term.
    pub total_energy: f64,
    /// ΔF / W, `None` while |W| is below the floor.
    pub efficiency: Option<f64>,
    /// W - Q - (⟨H⟩(t) - ⟨H⟩(0))
    pub first_law_residual: f64,
}

/// ω₀⟨J_z⟩.
pub fn internal_energy(rho: &ComplexMatrix, ops: &CollectiveOperators, omega0: f64) -> Result<f64> {
    Ok(omega0 * expectation(&ops.jz, rho)?)
}

/// Entropy from a spectrum, with 0 ln 0 = 0.
pub fn entropy_from_eigenvalues(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &lambda in eigenvalues {
        if lambda < -NEGATIVE_LIMIT {
            return Err(Error::PositivityViolation {
                t: f64::NAN,
                min_eigenvalue: lambda,
            });
        }
        if lambda > 0.0 {
            s -= lambda * lambda.ln();
        }
    }
    Ok(s.max(0.0))
}

/// S(ρ) = -Tr(ρ ln ρ) in nats.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    entropy_from_eigenvalues(&hermitian_eigenvalues(rho)?)
}

/// F = E - T S.
pub fn free_energy(energy: f64, entropy: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        energy
    } else {
        energy - temperature * entropy
    }
}

/// ⟨H(t)⟩ = E + A cos(ωt) ⟨J₊ + J₋⟩.
pub fn total_energy(
    rho: &ComplexMatrix,
    ops: &CollectiveOperators,
    p: &SimulationParams,
    t: f64,
) -> Result<f64> {
    let e = internal_energy(rho, ops, p.omega0)?;
    let drive = expectation(&ops.drive_operator(), rho)?;
    Ok(e + p.amplitude * (p.omega * t).cos() * drive)
}

/// η = ΔF / W, undefined when |W| ≤ `work_floor`.
pub fn efficiency(delta_f: f64, work: f64, work_floor: f64) -> Option<f64> {
    (work.abs() > work_floor).then(|| delta_f / work)
}

/// Running work and heat integrals.
///
/// Both are integrated with the same four-stage weights as the state
/// (1/6, 1/3, 1/3, 1/6 of the step), which keeps W - Q - Δ⟨H⟩ at the
/// integrator's own order rather than the quadrature's.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WorkHeatAccumulator {
    pub work: f64,
    pub heat: f64,
}

impl WorkHeatAccumulator {
    /// Adds `weight · (work_rate, heat_rate)`; weight already includes dt.
    pub fn add(&mut self, weight: f64, work_rate: f64, heat_rate: f64) {
        self.work += weight * work_rate;
        self.heat += weight * heat_rate;
    }
}

/// Reference values at t = 0 that every later record is measured against.
#[derive(Debug, Clone, Copy)]
pub struct ThermoBaseline {
    pub temperature: f64,
    pub omega0: f64,
    pub energy: f64,
    pub entropy: f64,
    pub free_energy: f64,
    pub total_energy: f64,
}

impl ThermoBaseline {
    pub fn new(temperature: f64, omega0: f64, energy: f64, entropy: f64, total_energy: f64) -> Self {
        Self {
            temperature,
            omega0,
            energy,
            entropy,
            free_energy: free_energy(energy, entropy, temperature),
            total_energy,
        }
    }

    pub fn record(
        &self,
        t: f64,
        energy: f64,
        entropy: f64,
        total_energy: f64,
        acc: WorkHeatAccumulator,
    ) -> ThermoRecord {
        let f = free_energy(energy, entropy, self.temperature);
        let delta_f = f - self.free_energy;
        ThermoRecord {
            t,
            energy,
            entropy,
            free_energy: f,
            delta_f,
            delta_e: energy - self.energy,
            delta_s: entropy - self.entropy,
            work: acc.work,
            heat: acc.heat,
            total_energy,
            efficiency: efficiency(delta_f, acc.work, EFFICIENCY_WORK_FLOOR * self.omega0),
            first_law_residual: acc.work - acc.heat - (total_energy - self.total_energy),
        }
    }
}
