use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |h - h†| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("expectation value has imaginary part {imag:e}; state is corrupted")]
    ComplexExpectation { imag: f64 },

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },

    #[error("state is not positive: eigenvalue {min_eigenvalue:e} at t = {t}")]
    PositivityViolation { t: f64, min_eigenvalue: f64 },

    #[error("trace drifted by {drift:e} at t = {t}; time step too large")]
    TraceDrift { t: f64, drift: f64 },

    #[error("Fock truncation overflow: top populations {population:e} at t = {t} (dimension {dim})")]
    TruncationOverflow { t: f64, population: f64, dim: usize },

    #[error("trajectory covers {periods} drive periods; at least {required} are needed")]
    TrajectoryTooShort { periods: usize, required: usize },

    #[error("closed form requires an underdamped regime (A^2 > gamma^2 chi^2 / 4)")]
    Overdamped,

    #[error("RWA analytics require resonant driving (omega = omega0), got omega = {omega}, omega0 = {omega0}")]
    OffResonance { omega: f64, omega0: f64 },

    #[error("no usable sweep entries for gamma = {gamma}, amplitude = {amplitude}, nbar = {nbar}")]
    NoUsableEntries {
        gamma: f64,
        amplitude: f64,
        nbar: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for failures caused by the numerics (state validity, integrator
    /// drift), as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PositivityViolation { .. }
                | Error::TraceDrift { .. }
                | Error::TruncationOverflow { .. }
                | Error::EigenNoConvergence { .. }
                | Error::ComplexExpectation { .. }
                | Error::NotHermitian { .. }
        )
    }
}
