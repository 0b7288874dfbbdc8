//! Collective spin operators in the symmetric Dicke sector, thermal initial
//! states, and truncated bosonic operators for the Holstein–Primakoff limit.
//!
//! Basis ordering: index `l = 0..=N` labels |J = N/2, m = l - N/2⟩, so index 0
//! is the collective ground state.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{matmul, ComplexMatrix};

/// J_x, J_y, J_z, J_± for `n_atoms` spin-1/2 atoms in the J = N/2 sector.
#[derive(Debug, Clone)]
pub struct CollectiveOperators {
    pub n_atoms: usize,
    pub jx: ComplexMatrix,
    pub jy: ComplexMatrix,
    pub jz: ComplexMatrix,
    pub jplus: ComplexMatrix,
    pub jminus: ComplexMatrix,
    /// J₊J₋
    pub jpjm: ComplexMatrix,
    /// J₋J₊
    pub jmjp: ComplexMatrix,
}

impl CollectiveOperators {
    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }

    /// J₊ + J₋ = 2 J_x, the operator the charging field couples to.
    pub fn drive_operator(&self) -> ComplexMatrix {
        self.jplus.try_add(&self.jminus).expect("same dimension")
    }
}

/// Builds the collective operators for `n_atoms ≥ 1`.
pub fn build_collective(n_atoms: usize) -> Result<CollectiveOperators> {
    if n_atoms == 0 {
        return Err(Error::InvalidParameter {
            key: "n_atoms",
            reason: "must be at least 1".into(),
        });
    }
    let dim = n_atoms + 1;
    let j = n_atoms as f64 / 2.0;
    let m = |l: usize| l as f64 - j;

    let jz = ComplexMatrix::from_real_diagonal(&(0..dim).map(m).collect::<Vec<_>>());
    let mut jplus = ComplexMatrix::zeros(dim);
    for l in 0..n_atoms {
        let ml = m(l);
        jplus[(l + 1, l)] = Complex64::new(((j - ml) * (j + ml + 1.0)).sqrt(), 0.0);
    }
    let jminus = jplus.adjoint();
    let jx = jplus.try_add(&jminus)?.scale_real(0.5);
    // (J₊ - J₋) / 2i
    let jy = jplus.try_sub(&jminus)?.scale(Complex64::new(0.0, -0.5));
    let jpjm = matmul(&jplus, &jminus)?;
    let jmjp = matmul(&jminus, &jplus)?;

    Ok(CollectiveOperators {
        n_atoms,
        jx,
        jy,
        jz,
        jplus,
        jminus,
        jpjm,
        jmjp,
    })
}

/// Bose–Einstein occupation n = 1 / (e^{ω/T} - 1), with n = 0 at T = 0.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (omega / temperature).exp_m1()
}

/// Inverts the Bose occupation: T = ω / ln(1 + 1/n̄).
pub fn nbar_to_temperature(nbar: f64, omega: f64) -> Result<f64> {
    if nbar.is_nan() || nbar < 0.0 {
        return Err(Error::InvalidParameter {
            key: "nbar",
            reason: format!("must be non-negative, got {nbar}"),
        });
    }
    if nbar == 0.0 {
        return Ok(0.0);
    }
    Ok(omega / (1.0 / nbar).ln_1p())
}

/// Normalised Boltzmann weights for equally spaced levels `l·spacing`,
/// l = 0..dim. At T = 0 all weight sits on l = 0.
fn boltzmann_ladder(dim: usize, spacing: f64, temperature: f64) -> Vec<f64> {
    let mut w = vec![0.0; dim];
    if temperature <= 0.0 {
        w[0] = 1.0;
        return w;
    }
    for (l, wl) in w.iter_mut().enumerate() {
        *wl = (-(l as f64) * spacing / temperature).exp();
    }
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);
    w
}

/// Thermal state e^{-ω₀J_z/T}/Z restricted to the symmetric Dicke sector.
pub fn gibbs_state(ops: &CollectiveOperators, omega0: f64, temperature: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&boltzmann_ladder(ops.dim(), omega0, temperature))
}

/// Truncated bosonic mode: b, b† and b†b on Fock states 0..M.
#[derive(Debug, Clone)]
pub struct BosonOperators {
    pub truncation: usize,
    pub b: ComplexMatrix,
    pub bdag: ComplexMatrix,
    pub number: ComplexMatrix,
}

pub fn build_boson(truncation: usize) -> Result<BosonOperators> {
    if truncation < 2 {
        return Err(Error::InvalidParameter {
            key: "truncation",
            reason: format!("Fock truncation must be at least 2, got {truncation}"),
        });
    }
    let mut bdag = ComplexMatrix::zeros(truncation);
    for k in 0..truncation - 1 {
        bdag[(k + 1, k)] = Complex64::new(((k + 1) as f64).sqrt(), 0.0);
    }
    let b = bdag.adjoint();
    // b†b, written out so the diagonal is exact
    let number =
        ComplexMatrix::from_real_diagonal(&(0..truncation).map(|k| k as f64).collect::<Vec<_>>());
    Ok(BosonOperators {
        truncation,
        b,
        bdag,
        number,
    })
}

/// Truncated thermal state of ω₀ b†b, the Holstein–Primakoff image of
/// [`gibbs_state`].
pub fn boson_thermal_state(ops: &BosonOperators, omega0: f64, temperature: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&boltzmann_ladder(ops.truncation, omega0, temperature))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, trace};

    const I: Complex64 = Complex64::new(0.0, 1.0);

    #[test]
    fn single_spin() {
        let ops = build_collective(1).unwrap();
        assert_eq!(ops.jz.diagonal(), vec![(-0.5).into(), 0.5.into()]);
        assert_eq!(ops.jx[(0, 1)], 0.5.into());
        assert_eq!(ops.jx[(1, 0)], 0.5.into());
    }

    #[test]
    fn spin_one_ladder() {
        let ops = build_collective(2).unwrap();
        assert_eq!(ops.jz.diagonal(), vec![(-1.0).into(), 0.0.into(), 1.0.into()]);
        let s2 = 2f64.sqrt();
        assert!((ops.jplus[(1, 0)].re - s2).abs() < 1e-15);
        assert!((ops.jplus[(2, 1)].re - s2).abs() < 1e-15);
        let nonzero = ops.jplus.as_slice().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn zero_atoms_rejected() {
        assert!(build_collective(0).is_err());
    }

    #[test]
    fn angular_momentum_algebra_n4() {
        let ops = build_collective(4).unwrap();
        let comm = commutator(&ops.jx, &ops.jy).unwrap();
        assert!(comm.max_abs_diff(&ops.jz.scale(I)) < 1e-12);
        // [J_z, J_+] = J_+
        let comm = commutator(&ops.jz, &ops.jplus).unwrap();
        assert!(comm.max_abs_diff(&ops.jplus) < 1e-12);
    }

    #[test]
    fn casimir_and_ladder_identities() {
        for n in 1..=64 {
            let ops = build_collective(n).unwrap();
            let j = n as f64 / 2.0;
            let sq = |a: &ComplexMatrix| matmul(a, a).unwrap();
            let casimir = sq(&ops.jx)
                .try_add(&sq(&ops.jy))
                .unwrap()
                .try_add(&sq(&ops.jz))
                .unwrap();
            let expected = ComplexMatrix::identity(n + 1).scale_real(j * (j + 1.0));
            assert!(casimir.max_abs_diff(&expected) < 1e-10, "N={n}");
            let diff = ops.jpjm.try_sub(&ops.jmjp).unwrap();
            assert!(diff.max_abs_diff(&ops.jz.scale_real(2.0)) < 1e-12, "N={n}");
        }
    }

    #[test]
    fn gibbs_zero_temperature_is_ground_state() {
        let ops = build_collective(5).unwrap();
        let rho = gibbs_state(&ops, 2.0, 0.0);
        assert_eq!(rho, ComplexMatrix::basis_projector(6, 0));
    }

    #[test]
    fn gibbs_infinite_temperature_is_maximally_mixed() {
        let ops = build_collective(3).unwrap();
        let rho = gibbs_state(&ops, 2.0, 2.0e12);
        let mixed = ComplexMatrix::identity(4).scale_real(0.25);
        assert!(rho.max_abs_diff(&mixed) < 1e-11);
    }

    #[test]
    fn gibbs_single_atom_at_nbar_0_2() {
        let ops = build_collective(1).unwrap();
        let t = nbar_to_temperature(0.2, 2.0).unwrap();
        let rho = gibbs_state(&ops, 2.0, t);
        assert!((rho[(0, 0)].re - 6.0 / 7.0).abs() < 1e-14);
        assert!((rho[(1, 1)].re - 1.0 / 7.0).abs() < 1e-14);
        assert!((trace(&rho).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn temperature_inversion() {
        assert_eq!(nbar_to_temperature(0.0, 2.0).unwrap(), 0.0);
        let t = nbar_to_temperature(0.2, 2.0).unwrap();
        assert!((t - 2.0 / 6f64.ln()).abs() < 1e-15);
        assert!((t - 1.116_22).abs() < 1e-5);
        for nbar in [0.1, 0.2, 1.0] {
            let t = nbar_to_temperature(nbar, 2.0).unwrap();
            assert!((bose_occupation(2.0, t) - nbar).abs() < 1e-12);
        }
        assert!(nbar_to_temperature(-0.1, 2.0).is_err());
    }

    #[test]
    fn boson_operators() {
        let ops = build_boson(2).unwrap();
        let expected = ComplexMatrix::from_vec(
            2,
            vec![0.0.into(), 1.0.into(), 0.0.into(), 0.0.into()],
        )
        .unwrap();
        assert_eq!(ops.b, expected);
        assert!(build_boson(1).is_err());

        let m = 6;
        let ops = build_boson(m).unwrap();
        let numbers: Vec<f64> = ops.number.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(numbers, (0..m).map(|k| k as f64).collect::<Vec<_>>());
        assert!(matmul(&ops.bdag, &ops.b).unwrap().max_abs_diff(&ops.number) < 1e-14);
        // [b, b†] = I - M |M-1><M-1|
        let comm = commutator(&ops.b, &ops.bdag).unwrap();
        let mut expected = ComplexMatrix::identity(m);
        expected[(m - 1, m - 1)] = Complex64::new(1.0 - m as f64, 0.0);
        assert!(comm.max_abs_diff(&expected) < 1e-12);
    }
}
