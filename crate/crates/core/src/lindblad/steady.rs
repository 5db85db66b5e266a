use super::density::{vec_index, DensityMatrix3, Vec9};
use super::liouvillian::Liouvillian;
use crate::error::{Error, Result};
use crate::C64;

/// Singular values below this fraction of the largest count as null.
const NULL_SPACE_RTOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-9;

/// Dimension of the numerical null space of `l`.
pub fn null_space_dim(l: &Liouvillian) -> usize {
    let sv = l.matrix().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return sv.len();
    }
    sv.iter().filter(|&&s| s <= NULL_SPACE_RTOL * max).count()
}

/// Solves `L vec(ρ) = 0` with `tr ρ = 1`.
///
/// The population equation for ρ_00 is replaced by the trace constraint,
/// which is admissible because the three population rows of a
/// trace-preserving generator sum to zero.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix3> {
    let null_dim = null_space_dim(l);
    if null_dim != 1 {
        return Err(Error::DegenerateSteadyState { null_dim });
    }
    let mut system = *l.matrix();
    let row = vec_index(0, 0);
    for col in 0..9 {
        system[(row, col)] = C64::new(0.0, 0.0);
    }
    for k in 0..3 {
        system[(row, vec_index(k, k))] = C64::new(1.0, 0.0);
    }
    let mut rhs = Vec9::zeros();
    rhs[row] = C64::new(1.0, 0.0);
    let x = system
        .lu()
        .solve(&rhs)
        .ok_or(Error::DegenerateSteadyState { null_dim: 2 })?;
    let rho = DensityMatrix3::normalized(DensityMatrix3::from_vec(&x).matrix());
    let residual = l.apply(&rho).norm();
    if !(residual < RESIDUAL_TOL) {
        return Err(Error::SteadyStateResidual { residual });
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{DriveParams, LambdaParams};
    use crate::units::angular;

    fn no_drive() -> DriveParams {
        DriveParams::default()
    }

    #[test]
    fn relaxes_to_ground_without_thermal_channel() {
        let mut p = LambdaParams::canonical();
        p.gamma_r_10 = 0.0;
        let rho = steady_state(&Liouvillian::build(&p, &no_drive())).unwrap();
        assert!((rho.population(0) - 1.0).abs() < 1e-12);
        assert!(rho.population(1).abs() < 1e-12 && rho.population(2).abs() < 1e-12);
    }

    #[test]
    fn detailed_balance_between_lowest_levels() {
        // |2⟩ needs a decay path for the steady state to be unique.
        let p = LambdaParams {
            gamma_r_02: 1.0,
            gamma_r_12: 0.0,
            gamma_r_01: 0.4,
            gamma_r_10: 0.1,
            gamma_phi_11: 0.0,
            gamma_phi_22: 0.0,
            ..LambdaParams::canonical()
        };
        let rho = steady_state(&Liouvillian::build(&p, &no_drive())).unwrap();
        assert!((rho.population(1) / rho.population(0) - 0.25).abs() < 1e-12);
        assert!(rho.get(0, 1).norm() < 1e-14);
    }

    #[test]
    fn isolated_excited_level_is_degenerate() {
        let p = LambdaParams {
            gamma_r_02: 0.0,
            gamma_r_12: 0.0,
            gamma_phi_11: 0.0,
            gamma_phi_22: 0.0,
            ..LambdaParams::canonical()
        };
        let err = steady_state(&Liouvillian::build(&p, &no_drive())).unwrap_err();
        assert!(matches!(err, Error::DegenerateSteadyState { null_dim: 2 }));
    }

    #[test]
    fn all_rates_zero_is_degenerate() {
        let p = LambdaParams::canonical().lossless();
        let d = DriveParams::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            steady_state(&Liouvillian::build(&p, &d)),
            Err(Error::DegenerateSteadyState { .. })
        ));
    }

    #[test]
    fn weak_probe_coherence_matches_two_level_formula() {
        // Two-level reduction: only the 0–2 channels of the canonical rates.
        let p = LambdaParams {
            gamma_r_12: 0.0,
            gamma_r_01: 0.0,
            gamma_r_10: 0.0,
            gamma_phi_11: 0.0,
            ..LambdaParams::canonical()
        };
        let omega_p = 0.01;
        // |1⟩ is uncoupled without a control field; a |1⟩→|0⟩ channel makes
        // the steady state unique and leaves ρ_02 untouched.
        let d = DriveParams::new(0.0, 0.0, omega_p, 0.0).unwrap();
        let p = LambdaParams { gamma_r_10: 0.0, gamma_r_01: 1.0, ..p };
        let rho = steady_state(&Liouvillian::build(&p, &d)).unwrap();
        let expected = -0.5 * angular(omega_p) / angular(p.gamma_02());
        let r02 = rho.get(0, 2);
        assert!(r02.re.abs() < 1e-12);
        assert!((r02.im - expected).abs() / expected.abs() < 1e-5, "{r02} vs {expected}");
        rho.check().unwrap();
    }
}
