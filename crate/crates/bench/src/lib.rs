//! Shared fixtures for the engine benchmarks.

use qbat_core::lindblad::initial_gibbs_state;
use qbat_core::{build_collective, CollectiveOperators, ComplexMatrix, SimulationParams};

/// Default-figure parameters for `n_atoms` with the automatic step.
pub fn params(n_atoms: usize, t_max: f64) -> SimulationParams {
    SimulationParams {
        n_atoms,
        t_max,
        ..Default::default()
    }
    .with_auto_dt()
}

/// Operators and Gibbs start for `n_atoms`.
pub fn fixture(n_atoms: usize) -> (SimulationParams, CollectiveOperators, ComplexMatrix) {
    let p = params(n_atoms, 10.0);
    let ops = build_collective(n_atoms).expect("n_atoms >= 1");
    let rho0 = initial_gibbs_state(&p, &ops);
    (p, ops, rho0)
}
