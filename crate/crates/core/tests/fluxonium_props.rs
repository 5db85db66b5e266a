use fluxeit_core::fluxonium::{build_fluxonium_hamiltonian, flux_sweep, spectrum, spectrum_unchecked};
use fluxeit_core::FluxoniumParams;
use proptest::prelude::*;

fn device(flux: f64, basis: usize) -> FluxoniumParams {
    FluxoniumParams::fitted_device().with_flux(flux).with_basis(basis)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn spectrum_is_flux_symmetric(flux in 0.0f64..1.0) {
        let a = spectrum(&device(flux, 60), 5).unwrap();
        let mirrored = spectrum(&device(1.0 - flux, 60), 5).unwrap();
        let shifted = spectrum(&device(flux + 1.0, 60), 5).unwrap();
        for j in 1..5 {
            prop_assert!((a.nu(0, j) - mirrored.nu(0, j)).abs() < 1e-9);
            prop_assert!((a.nu(0, j) - shifted.nu(0, j)).abs() < 1e-9);
        }
    }

    #[test]
    fn transitions_add_up(flux in 0.3f64..0.7, e_j in 2.0f64..12.0) {
        let p = FluxoniumParams { e_j, ..device(flux, 60) };
        let s = spectrum(&p, 3).unwrap();
        let e = &s.levels;
        prop_assert_eq!(s.nu(0, 1), e[1] - e[0]);
        prop_assert_eq!(s.nu(1, 2), e[2] - e[1]);
        prop_assert_eq!(s.nu(0, 2), e[2] - e[0]);
        prop_assert!((s.nu(0, 2) - s.nu(0, 1) - s.nu(1, 2)).abs() <= 4.0 * f64::EPSILON * e[2].abs().max(1.0));
    }

    #[test]
    fn hamiltonian_is_exactly_symmetric(flux in 0.0f64..1.0, basis in 10usize..50) {
        let h = build_fluxonium_hamiltonian(&device(flux, basis)).unwrap();
        prop_assert!(h == h.transpose());
    }
}

#[test]
fn basis_doubling_is_converged() {
    let small = spectrum(&device(0.53, 60), 3).unwrap();
    let large = spectrum(&device(0.53, 120), 3).unwrap();
    for i in 0..3 {
        assert!((small.levels[i] - large.levels[i]).abs() < 1e-8, "level {i}");
    }
}

#[test]
fn truncation_error_shrinks_with_basis() {
    let reference = spectrum(&device(0.53, 140), 3).unwrap();
    let errors: Vec<f64> = [20, 30, 40, 60]
        .iter()
        .map(|&n| {
            let s = spectrum_unchecked(&device(0.53, n), 3).unwrap();
            (0..3).map(|i| (s.levels[i] - reference.levels[i]).abs()).fold(0.0, f64::max)
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] <= w[0]), "{errors:?}");
}

#[test]
fn sweep_has_sweet_spot_at_half_flux() {
    let grid: Vec<f64> = (0..=40).map(|k| 0.3 + 0.01 * k as f64).collect();
    let rows = flux_sweep(&device(0.5, 60), &grid, 3).unwrap();
    assert_eq!(rows.len(), grid.len());
    let nu02: Vec<f64> = rows.iter().map(|r| r.spectrum.nu(0, 2)).collect();
    let nu01: Vec<f64> = rows.iter().map(|r| r.spectrum.nu(0, 1)).collect();
    let argmin = |v: &[f64]| (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    assert!((grid[argmin(&nu01)] - 0.5).abs() < 1e-9);
    let m = argmin(&nu02);
    assert!((grid[m] - 0.5).abs() <= 0.011);
    assert!(nu02[..=m].windows(2).all(|w| w[1] <= w[0]));
    assert!(nu02[m..].windows(2).all(|w| w[1] >= w[0]));
    for (row, &flux) in rows.iter().zip(&grid) {
        assert_eq!(row.flux, flux);
    }
}

#[test]
fn sweep_matches_pointwise_spectra() {
    let grid = [0.47, 0.53];
    let rows = flux_sweep(&device(0.5, 60), &grid, 3).unwrap();
    assert!((rows[0].spectrum.nu(0, 1) - rows[1].spectrum.nu(0, 1)).abs() < 1e-9);
    let direct = spectrum(&device(0.53, 60), 3).unwrap();
    assert_eq!(rows[1].spectrum.levels, direct.levels);
}
