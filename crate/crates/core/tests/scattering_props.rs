use fluxeit_core::scattering::{
    eit_spectrum, group_delay, linspace, lobe_around, remove_mismatch, transmission, unwrap_phase, window_center,
    WEAK_PROBE_MHZ,
};
use fluxeit_core::units::angular;
use fluxeit_core::{DriveParams, LambdaParams};
use proptest::prelude::*;

fn weak(delta_p: f64, omega_c: f64) -> DriveParams {
    DriveParams::new(delta_p, 0.0, WEAK_PROBE_MHZ, omega_c).unwrap()
}

/// Canonical rates without the thermal channels between |0⟩ and |1⟩.
fn symmetric(g12: f64, p22: f64) -> LambdaParams {
    LambdaParams {
        gamma_r_12: g12,
        gamma_r_01: 0.0,
        gamma_r_10: 0.0,
        gamma_phi_11: 0.0,
        gamma_phi_22: p22,
        mismatch_phase: 0.0,
        ..LambdaParams::canonical()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mismatch_only_rotates_the_scattered_part(phase in -3.0f64..3.0, dp in -8.0f64..8.0, oc in 0.0f64..10.0) {
        let base = LambdaParams::canonical();
        let t_plus = transmission(&base.with_mismatch(phase), &weak(dp, oc)).unwrap();
        let t_minus = transmission(&base.with_mismatch(-phase), &weak(dp, oc)).unwrap();
        let t_zero = transmission(&base.with_mismatch(0.0), &weak(dp, oc)).unwrap();
        prop_assert!((remove_mismatch(t_plus, &base.with_mismatch(phase)) - t_zero).norm() < 1e-12);
        prop_assert!(((t_plus - 1.0).norm() - (t_minus - 1.0).norm()).abs() < 1e-12);
    }

    #[test]
    fn mirror_at_two_photon_resonance(phase in -3.0f64..3.0, oc in 0.0f64..10.0, g12 in 0.0f64..5.0, p22 in 0.0f64..1.0) {
        // At Δ_p = Δ_c = 0 the scattered part is real, so flipping φ
        // conjugates it.
        let p = symmetric(g12, p22);
        let t_plus = transmission(&p.with_mismatch(phase), &weak(0.0, oc)).unwrap();
        let t_minus = transmission(&p.with_mismatch(-phase), &weak(0.0, oc)).unwrap();
        prop_assert!(((t_plus - 1.0) - (t_minus - 1.0).conj()).norm() < 1e-12);
    }

    #[test]
    fn magnitude_is_even_in_probe_detuning(dp in 0.0f64..15.0, oc in 0.0f64..10.0, g12 in 0.0f64..5.0, p22 in 0.0f64..1.0) {
        let p = symmetric(g12, p22);
        let a = transmission(&p, &weak(dp, oc)).unwrap();
        let b = transmission(&p, &weak(-dp, oc)).unwrap();
        prop_assert!((a.norm() - b.norm()).abs() < 1e-6);
    }

    #[test]
    fn transmission_is_linear_in_a_weak_probe(dp in -10.0f64..10.0, oc in 0.5f64..10.0, op in 1e-4f64..0.01) {
        let p = LambdaParams::canonical();
        let full = transmission(&p, &DriveParams::new(dp, 0.0, op, oc).unwrap()).unwrap();
        let half = transmission(&p, &DriveParams::new(dp, 0.0, 0.5 * op, oc).unwrap()).unwrap();
        prop_assert!((full - half).norm() <= 1e-3 * full.norm());
    }
}

/// Trapezoid integral of `τ_d` over `2π·Δ_p`, in rad.
fn integrated_delay(grid: &[f64], tau_ns: &[f64]) -> f64 {
    grid.windows(2)
        .zip(tau_ns.windows(2))
        .map(|(d, t)| 0.5 * (t[0] + t[1]) * 1e-3 * angular(d[1] - d[0]))
        .sum()
}

#[test]
fn delay_integrates_back_to_phase() {
    let p = LambdaParams::canonical();
    for (oc, lo, hi) in [(2.6, -3.0, 3.0), (2.6, -0.1, 1.5), (5.7, -4.0, 2.0), (0.0, -10.0, 5.0)] {
        let grid = linspace(lo, hi, 1201);
        let spectrum = eit_spectrum(&p, &weak(0.0, oc), &grid).unwrap();
        let curve = group_delay(&spectrum).unwrap();
        let tau: Vec<f64> = curve.tau_d.iter().map(|t| t.unwrap()).collect();
        let phase = unwrap_phase(&spectrum.iter().map(|s| s.t.arg()).collect::<Vec<_>>());
        let expected = -(phase[phase.len() - 1] - phase[0]);
        let got = integrated_delay(&grid, &tau);
        assert!((got - expected).abs() <= 0.01 * expected.abs(), "oc {oc}: {got} vs {expected}");
    }
}

#[test]
fn delay_peak_sits_inside_the_window_lobe() {
    let p = LambdaParams::canonical();
    let grid = linspace(-3.0, 3.0, 1201);
    let spectrum = eit_spectrum(&p, &weak(0.0, 2.6), &grid).unwrap();
    let curve = group_delay(&spectrum).unwrap();
    let (at, _) = curve.max().unwrap();
    let center = window_center(&spectrum, 0.0).unwrap();
    let peak = grid.iter().position(|&d| (d - center).abs() <= 0.5 * (grid[1] - grid[0]) + 1e-12).unwrap();
    let (lo, hi) = lobe_around(&spectrum, peak);
    assert!(grid[lo] <= at && at <= grid[hi], "argmax {at} outside [{}, {}]", grid[lo], grid[hi]);
}
