//! Brute-force two-qubit model used as an oracle for the N = 2 Dicke sector.

#![allow(dead_code)]

use num_complex::Complex64;
use qbat_core::dicke::gibbs_state;
use qbat_core::linalg::kron;
use qbat_core::lindblad::{integrate_model, IntegrationOptions, Jump, Lindbladian};
use qbat_core::{build_collective, ComplexMatrix, SimulationParams, Trajectory};

/// op ⊗ I + I ⊗ op
fn collective(single: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    kron(single, &id).try_add(&kron(&id, single)).unwrap()
}

/// Symmetric-sector Gibbs state embedded in the 4-dimensional space, with
/// the basis ordered |gg⟩, |ge⟩, |eg⟩, |ee⟩.
pub fn embedded_gibbs(p: &SimulationParams) -> ComplexMatrix {
    let ops = build_collective(2).unwrap();
    let pops: Vec<f64> = gibbs_state(&ops, p.omega0, p.temperature())
        .diagonal()
        .iter()
        .map(|z| z.re)
        .collect();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    let c = |x: f64| Complex64::new(x, 0.0);
    let dicke = [
        vec![c(1.0), z, z, z],
        vec![z, c(s), c(s), z],
        vec![z, z, z, c(1.0)],
    ];
    let mut rho = ComplexMatrix::zeros(4);
    for (state, pop) in dicke.iter().zip(pops) {
        rho = rho.try_add(&ComplexMatrix::outer(state).scale_real(pop)).unwrap();
    }
    rho
}

/// Integrates two independent-looking qubits under the collective
/// generator, built from single-atom operators.
pub fn two_qubit_trajectory(p: &SimulationParams) -> Trajectory {
    let one = build_collective(1).unwrap();
    let jz = collective(&one.jz);
    let jp = collective(&one.jplus);
    let jm = collective(&one.jminus);
    let model = Lindbladian::new(
        jz.scale_real(p.omega0),
        jp.try_add(&jm).unwrap(),
        p.amplitude,
        p.omega,
        vec![
            Jump {
                operator: jm,
                rate: p.gamma * (p.nbar + 1.0),
            },
            Jump {
                operator: jp,
                rate: p.gamma * p.nbar,
            },
        ],
    )
    .unwrap();
    integrate_model(&model, p, &embedded_gibbs(p), IntegrationOptions::default()).unwrap()
}
