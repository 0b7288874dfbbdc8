//! Driven-dissipative charging of a collective (Dicke) quantum battery.
//!
//! N two-level atoms share a thermal bath and a classical drive. The crate
//! integrates the Lindblad master equation in the symmetric Dicke sector,
//! tracks energy, entropy, free energy, work and heat, detects the driven
//! steady state, and sweeps N for the size that stores the most free energy.

pub mod analytic;
pub mod dicke;
pub mod error;
pub mod linalg;
pub mod lindblad;
pub mod params;
pub mod steady;
pub mod sweep;
pub mod thermo;

pub use dicke::{build_boson, build_collective, gibbs_state, nbar_to_temperature, BosonOperators, CollectiveOperators};
pub use error::{Error, Result};
pub use linalg::{hermitian_eigen, ComplexMatrix, HermitianEigenDecomposition};
pub use lindblad::{integrate, integrate_hp, integrate_hp_adaptive, integrate_until_steady, Lindbladian, Trajectory};
pub use params::SimulationParams;
pub use steady::{detect_steady_state, SteadyStateResult};
pub use sweep::{find_optimal_n, parallel_comparison, run_sweep, Objective, SweepResult, SweepSpec};
pub use thermo::ThermoRecord;

/// Crate version, stamped into every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
