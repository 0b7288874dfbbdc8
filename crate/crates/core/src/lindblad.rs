//! Time-dependent Lindblad master equation with fixed-step RK4.
//!
//! The generator is
//!
//! ```text
//! dρ/dt = -i[H(t), ρ] + Σ_k r_k (2 L_k ρ L_k† - {L_k† L_k, ρ}),
//! H(t)  = H_s + A cos(ωt) V
//! ```
//!
//! For the collective battery H_s = ω₀J_z, V = J₊ + J₋, and the two channels
//! are L = J₋ at rate γ(n̄+1) and L = J₊ at rate γn̄. The superoperator is
//! never materialised: each evaluation costs a handful of matrix products.

use num_complex::Complex64;

use crate::dicke::{
    boson_thermal_state, build_boson, build_collective, gibbs_state, BosonOperators,
    CollectiveOperators,
};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, matmul, matmul_into, trace, trace_product_unchecked, ComplexMatrix,
};
use crate::params::SimulationParams;
use crate::steady::{detect_steady_state, PeriodAverager, SteadyStateResult};
use crate::thermo::{entropy_from_eigenvalues, ThermoBaseline, ThermoRecord, WorkHeatAccumulator};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest |Tr ρ - 1| tolerated after a step before the step is rejected.
pub const TRACE_GUARD: f64 = 1e-8;

/// Population allowed in the top two Fock levels of a truncated mode.
pub const TRUNCATION_THRESHOLD: f64 = 1e-8;

/// A dissipation channel r (2 L ρ L† - {L†L, ρ}).
#[derive(Debug, Clone)]
pub struct Jump {
    pub operator: ComplexMatrix,
    pub rate: f64,
}

/// Precomputed generator for one parameter set.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    energy_op: ComplexMatrix,
    drive_op: ComplexMatrix,
    amplitude: f64,
    omega: f64,
    jumps: Vec<Jump>,
    /// -i H_s - Σ r L†L
    static_generator: ComplexMatrix,
    /// -i V
    drive_generator: ComplexMatrix,
    /// D†[H_s] and D†[V], for the heat current.
    adjoint_energy: ComplexMatrix,
    adjoint_drive: ComplexMatrix,
}

impl Lindbladian {
    /// Generic constructor. `energy_op` is the bare system Hamiltonian H_s,
    /// `drive_op` the operator multiplying A cos(ωt).
    pub fn new(
        energy_op: ComplexMatrix,
        drive_op: ComplexMatrix,
        amplitude: f64,
        omega: f64,
        jumps: Vec<Jump>,
    ) -> Result<Self> {
        let dim = energy_op.dim();
        for m in std::iter::once(&drive_op).chain(jumps.iter().map(|j| &j.operator)) {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
        }
        let mut static_generator = energy_op.scale(-I);
        let mut adjoint_energy = ComplexMatrix::zeros(dim);
        let mut adjoint_drive = ComplexMatrix::zeros(dim);
        for jump in jumps.iter().filter(|j| j.rate != 0.0) {
            let l = &jump.operator;
            let ldag = l.adjoint();
            let ldl = matmul(&ldag, l)?;
            static_generator.axpy_real(-jump.rate, &ldl);
            for (x, out) in [(&energy_op, &mut adjoint_energy), (&drive_op, &mut adjoint_drive)] {
                // r (2 L† X L - L†L X - X L†L)
                let sandwich = matmul(&matmul(&ldag, x)?, l)?;
                out.axpy_real(2.0 * jump.rate, &sandwich);
                out.axpy_real(-jump.rate, &matmul(&ldl, x)?);
                out.axpy_real(-jump.rate, &matmul(x, &ldl)?);
            }
        }
        let drive_generator = drive_op.scale(-I);
        Ok(Self {
            energy_op,
            drive_op,
            amplitude,
            omega,
            jumps,
            static_generator,
            drive_generator,
            adjoint_energy,
            adjoint_drive,
        })
    }

    /// The collective battery: H_s = ω₀J_z, V = J₊ + J₋, channels J₋ at
    /// γ(n̄+1) and J₊ at γn̄.
    pub fn dicke(p: &SimulationParams, ops: &CollectiveOperators) -> Result<Self> {
        Self::new(
            ops.jz.scale_real(p.omega0),
            ops.drive_operator(),
            p.amplitude,
            p.omega,
            vec![
                Jump {
                    operator: ops.jminus.clone(),
                    rate: p.gamma * (p.nbar + 1.0),
                },
                Jump {
                    operator: ops.jplus.clone(),
                    rate: p.gamma * p.nbar,
                },
            ],
        )
    }

    /// Holstein–Primakoff image: J_z → b†b - N/2, J₊ → √N b†, so
    /// H_s = ω₀(b†b - N/2), V = √N (b + b†), channels b at γN(n̄+1), b† at γNn̄.
    pub fn holstein_primakoff(p: &SimulationParams, ops: &BosonOperators) -> Result<Self> {
        let n = p.n_atoms as f64;
        let shift = ComplexMatrix::identity(ops.truncation).scale_real(-n / 2.0);
        let energy = ops.number.try_add(&shift)?.scale_real(p.omega0);
        let drive = ops.b.try_add(&ops.bdag)?.scale_real(n.sqrt());
        Self::new(
            energy,
            drive,
            p.amplitude,
            p.omega,
            vec![
                Jump {
                    operator: ops.b.clone(),
                    rate: p.gamma * n * (p.nbar + 1.0),
                },
                Jump {
                    operator: ops.bdag.clone(),
                    rate: p.gamma * n * p.nbar,
                },
            ],
        )
    }

    pub fn dim(&self) -> usize {
        self.energy_op.dim()
    }

    pub fn energy_operator(&self) -> &ComplexMatrix {
        &self.energy_op
    }

    pub fn drive_operator(&self) -> &ComplexMatrix {
        &self.drive_op
    }

    fn drive_factor(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t).cos()
    }

    /// H(t) = H_s + A cos(ωt) V.
    pub fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        let mut h = self.energy_op.clone();
        h.axpy_real(self.drive_factor(t), &self.drive_op);
        h
    }

    /// dρ/dt for a Hermitian ρ. The result is Hermitian by construction.
    pub fn rhs(&self, rho: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        let mut ws = Workspace::new(self.dim());
        let mut out = ComplexMatrix::zeros(self.dim());
        self.rhs_into(rho, t, &mut out, &mut ws);
        Ok(out)
    }

    /// Writes dρ/dt into `out` using `ws` as scratch.
    ///
    /// With G = -iH(t) - Σ r L†L the coherent and anticommutator parts are
    /// Gρ + ρG† = Gρ + (Gρ)†, and L ρ L† = L (L ρ)† for Hermitian ρ.
    pub(crate) fn rhs_into(
        &self,
        rho: &ComplexMatrix,
        t: f64,
        out: &mut ComplexMatrix,
        ws: &mut Workspace,
    ) {
        ws.generator.clone_from(&self.static_generator);
        let f = self.drive_factor(t);
        if f != 0.0 {
            ws.generator.axpy_real(f, &self.drive_generator);
        }
        matmul_into(&ws.generator, rho, &mut ws.product);
        out.clone_from(&ws.product);
        out.add_adjoint_of(&ws.product);
        for jump in self.jumps.iter().filter(|j| j.rate != 0.0) {
            matmul_into(&jump.operator, rho, &mut ws.product);
            adjoint_into(&ws.product, &mut ws.adjoint);
            matmul_into(&jump.operator, &ws.adjoint, &mut ws.product);
            out.axpy_real(2.0 * jump.rate, &ws.product);
        }
    }

    /// The dissipative part D[ρ] alone, evaluated directly.
    pub fn dissipator(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(self.dim());
        for jump in self.jumps.iter().filter(|j| j.rate != 0.0) {
            let l = &jump.operator;
            let ldag = l.adjoint();
            let ldl = matmul(&ldag, l)?;
            out.axpy_real(2.0 * jump.rate, &matmul(&matmul(l, rho)?, &ldag)?);
            out.axpy_real(-jump.rate, &matmul(&ldl, rho)?);
            out.axpy_real(-jump.rate, &matmul(rho, &ldl)?);
        }
        Ok(out)
    }

    /// E = Tr(H_s ρ).
    pub fn energy(&self, rho: &ComplexMatrix) -> f64 {
        trace_product_unchecked(&self.energy_op, rho).re
    }

    /// ⟨H(t)⟩ = Tr(H(t) ρ).
    pub fn total_energy(&self, rho: &ComplexMatrix, t: f64) -> f64 {
        self.energy(rho) + self.drive_factor(t) * trace_product_unchecked(&self.drive_op, rho).re
    }

    /// Power injected by the drive: Tr(ρ ∂H/∂t) = -Aω sin(ωt) ⟨V⟩.
    pub fn work_rate(&self, rho: &ComplexMatrix, t: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        -self.amplitude
            * self.omega
            * (self.omega * t).sin()
            * trace_product_unchecked(&self.drive_op, rho).re
    }

    /// Heat current into the bath: -Tr(D[ρ] H(t)) = -Tr(ρ D†[H(t)]).
    pub fn heat_rate(&self, rho: &ComplexMatrix, t: f64) -> f64 {
        let mut q = trace_product_unchecked(&self.adjoint_energy, rho).re;
        let f = self.drive_factor(t);
        if f != 0.0 {
            q += f * trace_product_unchecked(&self.adjoint_drive, rho).re;
        }
        -q
    }
}

fn adjoint_into(a: &ComplexMatrix, out: &mut ComplexMatrix) {
    let n = a.dim();
    let src = a.as_slice();
    let dst = out.as_mut_slice();
    for i in 0..n {
        for j in 0..n {
            dst[i * n + j] = src[j * n + i].conj();
        }
    }
}

/// Scratch buffers reused across right-hand-side evaluations.
#[derive(Debug, Clone)]
pub(crate) struct Workspace {
    generator: ComplexMatrix,
    product: ComplexMatrix,
    adjoint: ComplexMatrix,
}

impl Workspace {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            generator: ComplexMatrix::zeros(dim),
            product: ComplexMatrix::zeros(dim),
            adjoint: ComplexMatrix::zeros(dim),
        }
    }
}

/// Free-function form of the collective generator.
pub fn liouvillian_rhs(
    rho: &ComplexMatrix,
    t: f64,
    p: &SimulationParams,
    ops: &CollectiveOperators,
) -> Result<ComplexMatrix> {
    Lindbladian::dicke(p, ops)?.rhs(rho, t)
}

/// A state that classical RK4 can advance.
pub trait OdeState: Clone {
    /// self += s · other
    fn add_scaled(&mut self, s: f64, other: &Self);
}

impl OdeState for f64 {
    fn add_scaled(&mut self, s: f64, other: &Self) {
        *self += s * other;
    }
}

impl<const N: usize> OdeState for [f64; N] {
    fn add_scaled(&mut self, s: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += s * b;
        }
    }
}

impl OdeState for ComplexMatrix {
    fn add_scaled(&mut self, s: f64, other: &Self) {
        self.axpy_real(s, other);
    }
}

/// One classical RK4 step. `observe(stage_state, stage_time, weight)` sees
/// each of the four stage states with its quadrature weight (dt/6, dt/3,
/// dt/3, dt/6), so that side integrals share the integrator's order.
pub fn rk4_step_observed<S: OdeState>(
    y: &S,
    t: f64,
    dt: f64,
    mut f: impl FnMut(&S, f64) -> S,
    mut observe: impl FnMut(&S, f64, f64),
) -> S {
    let half = 0.5 * dt;
    observe(y, t, dt / 6.0);
    let k1 = f(y, t);

    let mut stage = y.clone();
    stage.add_scaled(half, &k1);
    observe(&stage, t + half, dt / 3.0);
    let k2 = f(&stage, t + half);

    let mut stage = y.clone();
    stage.add_scaled(half, &k2);
    observe(&stage, t + half, dt / 3.0);
    let k3 = f(&stage, t + half);

    let mut stage = y.clone();
    stage.add_scaled(dt, &k3);
    observe(&stage, t + dt, dt / 6.0);
    let k4 = f(&stage, t + dt);

    let mut next = y.clone();
    next.add_scaled(dt / 6.0, &k1);
    next.add_scaled(dt / 3.0, &k2);
    next.add_scaled(dt / 3.0, &k3);
    next.add_scaled(dt / 6.0, &k4);
    next
}

/// Plain RK4 step for any [`OdeState`].
pub fn rk4<S: OdeState>(y: &S, t: f64, dt: f64, f: impl FnMut(&S, f64) -> S) -> S {
    rk4_step_observed(y, t, dt, f, |_, _, _| {})
}

/// RK4 step for a density matrix: the result is re-Hermitised and, if its
/// trace is within [`TRACE_GUARD`] of one, renormalised.
pub fn rk4_step(
    rho: &ComplexMatrix,
    t: f64,
    dt: f64,
    rhs: impl FnMut(&ComplexMatrix, f64) -> ComplexMatrix,
) -> Result<ComplexMatrix> {
    let mut next = rk4(rho, t, dt, rhs);
    finalize_step(&mut next, t + dt)?;
    Ok(next)
}

fn finalize_step(rho: &mut ComplexMatrix, t: f64) -> Result<()> {
    rho.hermitize();
    let tr = trace(rho).re;
    let drift = (tr - 1.0).abs();
    if drift.is_nan() || drift >= TRACE_GUARD {
        return Err(Error::TraceDrift { t, drift });
    }
    if tr != 1.0 {
        *rho = rho.scale_real(1.0 / tr);
    }
    Ok(())
}

/// Validity diagnostics of one recorded state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

/// Output of an integration run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Recorded states; empty unless requested.
    pub states: Vec<ComplexMatrix>,
    pub records: Vec<ThermoRecord>,
    pub diagnostics: Vec<StateDiagnostics>,
    pub temperature: f64,
    pub drive_period: f64,
}

impl Trajectory {
    pub fn final_record(&self) -> &ThermoRecord {
        self.records.last().expect("trajectory has the t = 0 record")
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("trajectory has t = 0")
    }
}

/// Knobs beyond [`SimulationParams`].
#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrationOptions {
    pub store_states: bool,
    /// Stop as soon as the period-averaged ΔF settles.
    pub stop_at_steady: bool,
    /// Fail when the top two diagonal entries exceed this population.
    pub truncation_guard: Option<f64>,
}

fn validate_initial_state(rho0: &ComplexMatrix, dim: usize, positivity_tolerance: f64) -> Result<()> {
    let invalid = |reason: String| Error::InvalidParameter { key: "rho0", reason };
    if rho0.dim() != dim {
        return Err(invalid(format!("dimension {} does not match {dim}", rho0.dim())));
    }
    let herm = rho0.hermiticity_error();
    if herm > 1e-10 {
        return Err(invalid(format!("not Hermitian (deviation {herm:e})")));
    }
    let drift = (trace(rho0).re - 1.0).abs();
    if drift > TRACE_GUARD {
        return Err(invalid(format!("trace differs from one by {drift:e}")));
    }
    let min = hermitian_eigenvalues(rho0)?[0];
    if min < -positivity_tolerance {
        return Err(invalid(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// Integrates the given generator from `rho0` over [0, t_max].
pub fn integrate_model(
    model: &Lindbladian,
    p: &SimulationParams,
    rho0: &ComplexMatrix,
    opts: IntegrationOptions,
) -> Result<Trajectory> {
    p.validate()?;
    let dim = model.dim();
    validate_initial_state(rho0, dim, p.positivity_tolerance)?;

    let temperature = p.temperature();
    let period = p.drive_period();
    let mut rho = rho0.clone();
    rho.hermitize();

    let eig0 = hermitian_eigenvalues(&rho)?;
    let baseline = ThermoBaseline::new(
        temperature,
        p.omega0,
        model.energy(&rho),
        entropy_from_eigenvalues(&eig0)?,
        model.total_energy(&rho, 0.0),
    );

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        records: Vec::new(),
        diagnostics: Vec::new(),
        temperature,
        drive_period: period,
    };
    let mut acc = WorkHeatAccumulator::default();
    let mut averager = PeriodAverager::new(period);
    let ss_tol = p.ss_tolerance * p.omega0;

    let mut record = |traj: &mut Trajectory, rho: &ComplexMatrix, t: f64, acc| -> Result<bool> {
        let eig = hermitian_eigenvalues(rho)?;
        let min_eigenvalue = eig[0];
        if min_eigenvalue < -p.positivity_tolerance {
            return Err(Error::PositivityViolation { t, min_eigenvalue });
        }
        let entropy = entropy_from_eigenvalues(&eig).map_err(|_| Error::PositivityViolation {
            t,
            min_eigenvalue,
        })?;
        let rec = baseline.record(t, model.energy(rho), entropy, model.total_energy(rho, t), acc);
        traj.times.push(t);
        traj.records.push(rec);
        traj.diagnostics.push(StateDiagnostics {
            trace_error: (trace(rho).re - 1.0).abs(),
            hermiticity_error: rho.hermiticity_error(),
            min_eigenvalue,
        });
        if opts.store_states {
            traj.states.push(rho.clone());
        }
        let settled = averager.push(&rec) && averager.is_steady(ss_tol);
        Ok(settled)
    };

    record(&mut traj, &rho, 0.0, acc)?;

    let steps = p.total_steps();
    let mut ws = Workspace::new(dim);
    for step in 1..=steps {
        let t = (step - 1) as f64 * p.dt;
        let mut next = rk4_step_observed(
            &rho,
            t,
            p.dt,
            |y, s| {
                let mut out = ComplexMatrix::zeros(dim);
                model.rhs_into(y, s, &mut out, &mut ws);
                out
            },
            |y, s, w| acc.add(w, model.work_rate(y, s), model.heat_rate(y, s)),
        );
        let t_next = step as f64 * p.dt;
        finalize_step(&mut next, t_next)?;
        rho = next;

        if let Some(limit) = opts.truncation_guard {
            let diag = rho.diagonal();
            let top = diag[dim - 1].re + if dim >= 2 { diag[dim - 2].re } else { 0.0 };
            if top > limit {
                return Err(Error::TruncationOverflow {
                    t: t_next,
                    population: top,
                    dim,
                });
            }
        }

        if step % p.record_stride == 0 || step == steps {
            let settled = record(&mut traj, &rho, t_next, acc)?;
            if settled && opts.stop_at_steady {
                break;
            }
        }
    }
    Ok(traj)
}

/// Collective battery from its Gibbs state at the bath temperature.
pub fn initial_gibbs_state(p: &SimulationParams, ops: &CollectiveOperators) -> ComplexMatrix {
    gibbs_state(ops, p.omega0, p.temperature())
}

/// Integrates the collective battery from `rho0`, recording states.
pub fn integrate(
    p: &SimulationParams,
    ops: &CollectiveOperators,
    rho0: &ComplexMatrix,
) -> Result<Trajectory> {
    let model = Lindbladian::dicke(p, ops)?;
    integrate_model(
        &model,
        p,
        rho0,
        IntegrationOptions {
            store_states: true,
            ..Default::default()
        },
    )
}

/// Runs from the Gibbs state until the period-averaged ΔF settles or t_max
/// is reached. States are not stored.
pub fn integrate_until_steady(p: &SimulationParams) -> Result<(Trajectory, SteadyStateResult)> {
    let ops = build_collective(p.n_atoms)?;
    let model = Lindbladian::dicke(p, &ops)?;
    let rho0 = initial_gibbs_state(p, &ops);
    let traj = integrate_model(
        &model,
        p,
        &rho0,
        IntegrationOptions {
            stop_at_steady: true,
            ..Default::default()
        },
    )?;
    let steady = detect_steady_state(&traj, p)?;
    Ok((traj, steady))
}

/// Holstein–Primakoff bosonic run from the truncated thermal state.
pub fn integrate_hp(p: &SimulationParams, truncation: usize) -> Result<Trajectory> {
    let ops = build_boson(truncation)?;
    let rho0 = boson_thermal_state(&ops, p.omega0, p.temperature());
    integrate_hp_from(p, &ops, &rho0, false)
}

/// Largest Fock truncation tried by [`integrate_hp_adaptive`].
pub const MAX_TRUNCATION: usize = 128;

/// [`integrate_hp`] starting at `truncation` and doubling it whenever the
/// top Fock levels fill up. Returns the trajectory and the truncation used.
pub fn integrate_hp_adaptive(p: &SimulationParams, truncation: usize) -> Result<(Trajectory, usize)> {
    let mut m = truncation;
    loop {
        match integrate_hp(p, m) {
            Ok(traj) => return Ok((traj, m)),
            Err(Error::TruncationOverflow { .. }) if 2 * m <= MAX_TRUNCATION => m *= 2,
            Err(e) => return Err(e),
        }
    }
}

/// Holstein–Primakoff run from an arbitrary initial state.
pub fn integrate_hp_from(
    p: &SimulationParams,
    ops: &BosonOperators,
    rho0: &ComplexMatrix,
    store_states: bool,
) -> Result<Trajectory> {
    let model = Lindbladian::holstein_primakoff(p, ops)?;
    let top = {
        let d = rho0.diagonal();
        let m = d.len();
        d[m - 1].re + d[m - 2].re
    };
    if top > TRUNCATION_THRESHOLD {
        return Err(Error::TruncationOverflow {
            t: 0.0,
            population: top,
            dim: ops.truncation,
        });
    }
    integrate_model(
        &model,
        p,
        rho0,
        IntegrationOptions {
            store_states,
            stop_at_steady: false,
            truncation_guard: Some(TRUNCATION_THRESHOLD),
        },
    )
}
