//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any
//! criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use fluxeit_core::fluxonium::{spectrum, FluxoniumParams};
use fluxeit_core::lindblad::{
    evolve, steady_state, DensityMatrix3, DriveParams, DriveSchedule, LambdaParams, Liouvillian, Matrix3c,
    TimeGrid,
};
use fluxeit_core::pulse::{
    extract_delay, fit_decay_constant, propagate_pulse, reference_pulse, run_storage,
    storage_efficiency, storage_sweep, PulseSpec, StorageSchedule,
};
use fluxeit_core::scattering::{
    eit_spectrum, eit_threshold, group_delay, linspace, transmission, window_center, WEAK_PROBE_MHZ,
};
use fluxeit_core::selection::{aic_weight_curve, find_crossover, SweepSettings};
use fluxeit_core::units::TWO_PI;
use fluxeit_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

fn table() -> LambdaParams {
    LambdaParams::canonical()
}

fn superposition(a: usize, b: usize) -> DensityMatrix3 {
    let mut m = Matrix3c::zeros();
    for i in [a, b] {
        for j in [a, b] {
            m[(i, j)] = C64::new(0.5, 0.0);
        }
    }
    DensityMatrix3::new(m).unwrap()
}

/// Decay rate (MHz, linear) of `|ρ_ab|` in free evolution.
fn free_decay_rate(params: &LambdaParams, a: usize, b: usize, span: f64) -> f64 {
    let grid = TimeGrid::spanning(0.0, span, span / 200.0).unwrap();
    let schedule = DriveSchedule::constant(&DriveParams::default());
    let traj = evolve(&superposition(a, b), params, &schedule, &grid).unwrap();
    let mags: Vec<f64> = traj.states.iter().map(|s| s.get(a, b).norm()).collect();
    1.0 / fit_decay_constant(&traj.times, &mags).unwrap() / TWO_PI
}

fn c1_spectrum() -> Outcome {
    let started = Instant::now();
    let s = spectrum(&FluxoniumParams::new(9.041, 0.995, 0.807, 0.53, 60).unwrap(), 3).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let pairs = [((0, 1), 0.648), ((1, 2), 6.681), ((0, 2), 7.329)];
    let ok = pairs.iter().all(|&((i, j), t)| within(s.nu(i, j), t, 0.03));
    outcome(
        ok && secs < 1.0,
        format!(
            "nu01 {:.4} (0.648), nu12 {:.4} (6.681), nu02 {:.4} (7.329) GHz, tol 3%; {:.3} s",
            s.nu(0, 1),
            s.nu(1, 2),
            s.nu(0, 2),
            secs
        ),
    )
}

fn c2_oscillator_limit() -> Outcome {
    let p = FluxoniumParams::new(0.0, 0.995, 0.807, 0.53, 60).unwrap();
    let s = spectrum(&p, 20).unwrap();
    let omega = (8.0f64 * 0.995 * 0.807).sqrt();
    let err = (0..19)
        .map(|k| (s.levels[k + 1] - s.levels[k] - omega).abs())
        .fold(0.0, f64::max);
    outcome(err < 1e-9, format!("max spacing error {err:.2e} GHz over 20 levels (tol 1e-9)"))
}

fn c3_decoherence_relation() -> Outcome {
    let p = table();
    let g02 = free_decay_rate(&p, 0, 2, 0.1);
    let g01 = free_decay_rate(&p, 0, 1, 5.0);
    let (e02, e01) = (p.gamma_r_02 / 2.0 + p.gamma_phi_22, p.gamma_r_01 / 2.0 + p.gamma_phi_11);
    outcome(
        within(g02, e02, 0.01) && within(g01, e01, 0.01),
        format!("propagated gamma_02 {g02:.4} vs {e02:.4}, gamma_01 {g01:.4} vs {e01:.4} MHz (tol 1%)"),
    )
}

fn c4_extinction() -> Outcome {
    let weak = DriveParams::new(0.0, 0.0, WEAK_PROBE_MHZ, 0.0).unwrap();
    // |1⟩ drains into |0⟩ so the steady state is unique; it stays empty and
    // leaves ρ_02 untouched, which makes this an exact two-level atom.
    let radiative = LambdaParams {
        gamma_r_12: 0.0,
        gamma_r_01: 1.0,
        gamma_r_10: 0.0,
        gamma_phi_11: 0.0,
        gamma_phi_22: 0.0,
        mismatch_phase: 0.0,
        ..table()
    };
    // Two-level reading: only the probe transition's emission and dephasing.
    let dephased = LambdaParams {
        gamma_phi_22: table().gamma_phi_22,
        ..radiative
    };
    // Saturation enters at order Ω_p², so the weak-probe closed form is
    // 1 − (Γ_02/2)/(Γ_02/2 + γ_22).
    let oracle = 1.0 - (dephased.gamma_r_02 / 2.0) / (dephased.gamma_r_02 / 2.0 + dephased.gamma_phi_22);
    // Saturation leaves |t| ~ (Ω_p/Γ_02)² ≈ 1e-8 at the default weak probe,
    // so the exact zero is probed deeper in the linear regime.
    let weaker = DriveParams::new(0.0, 0.0, 1e-5, 0.0).unwrap();
    let t_rad = transmission(&radiative, &weaker).unwrap().norm();
    let t_deph = transmission(&dephased, &weak).unwrap().norm();
    outcome(
        t_rad < 1e-9 && (t_deph - 0.0227).abs() <= 0.001 && (t_deph - oracle).abs() < 1e-6,
        format!("radiative |t| {t_rad:.2e} at Omega_p 1e-5 MHz (tol 1e-9); dephased |t| {t_deph:.5} (0.0227 ± 0.001, closed form {oracle:.5})"),
    )
}

fn c5_dark_state() -> Outcome {
    let p = LambdaParams {
        gamma_r_01: 0.0,
        gamma_r_10: 0.0,
        gamma_phi_11: 0.0,
        ..table()
    };
    let worst = [0.5, 2.6, 10.0]
        .iter()
        .map(|&oc| {
            let d = DriveParams::new(0.0, 0.0, WEAK_PROBE_MHZ, oc).unwrap();
            (transmission(&p, &d).unwrap() - 1.0).norm()
        })
        .fold(0.0, f64::max);
    outcome(worst < 1e-6, format!("max |t - 1| {worst:.2e} over Omega_c in {{0.5, 2.6, 10}} MHz (tol 1e-6)"))
}

fn c6_threshold() -> Outcome {
    let th = eit_threshold(&table());
    let oracle = 13.78 / 2.0 + 0.16 - (0.022 / 2.0 + 0.14);
    outcome(
        (th - oracle).abs() < 1e-12 && (th - 6.899).abs() < 1e-9 && within(th, 6.85, 0.01),
        format!("{th:.6} MHz (exact 6.899; reference 6.85, tol 1%)"),
    )
}

fn c7_slow_light() -> Outcome {
    let started = Instant::now();
    let p = table();
    let oc = 2.6;
    let grid = linspace(-3.0, 3.0, 1201);
    let spec = eit_spectrum(&p, &DriveParams::new(0.0, 0.0, WEAK_PROBE_MHZ, oc).unwrap(), &grid).unwrap();
    let curve = group_delay(&spec).unwrap();
    let center = window_center(&spec, 0.0).unwrap();
    let tau = curve.at(center).unwrap();

    let probe = PulseSpec::new(1.0, 0.01, 5.0, center).unwrap();
    let tgrid = probe.grid(5.0, 0.01).unwrap();
    let reference = reference_pulse(&p, &probe, &tgrid).unwrap();
    let test = propagate_pulse(&p, &probe, move |_| oc, 0.0, &tgrid).unwrap();
    let pulse_tau = extract_delay(&reference, &test).unwrap();
    let secs = started.elapsed().as_secs_f64();
    outcome(
        within(tau, 217.0, 0.2) && within(pulse_tau, tau, 0.1) && secs < 30.0,
        format!(
            "window center {center:.4} MHz: spectral tau_d {tau:.1} ns (217 ± 20%), pulse centroid {pulse_tau:.1} ns (tol 10%); global max {:.1} ns; {secs:.1} s",
            curve.max().unwrap().1
        ),
    )
}

fn c8_fast_light() -> Outcome {
    let p = table();
    let grid = linspace(-3.0, 3.0, 1201);
    let spec = eit_spectrum(&p, &DriveParams::new(0.0, 0.0, WEAK_PROBE_MHZ, 2.6).unwrap(), &grid).unwrap();
    let curve = group_delay(&spec).unwrap();
    let (d, tau) = curve
        .valid()
        .filter(|(d, _)| (0.7..=1.7).contains(d))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    outcome(tau < 0.0, format!("min tau_d in [0.7, 1.7] MHz: {tau:.1} ns at {d:.3} MHz"))
}

fn c9_storage() -> Outcome {
    let started = Instant::now();
    let p = table();
    let probe = PulseSpec::new(0.05, 0.54, 0.5, 0.0).unwrap();
    let schedule = StorageSchedule::new(5.7, 0.55, 0.5, 0.02).unwrap();
    let grid = schedule.grid(&probe, 0.002).unwrap();
    let reference = reference_pulse(&p, &probe, &grid).unwrap();
    let run = run_storage(&p, &probe, &schedule, &grid).unwrap();
    let eta = storage_efficiency(&reference, &run.record, run.window).unwrap();

    let taus = [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0];
    let sweep = storage_sweep(&p, &probe, &schedule, &taus, 0.002).unwrap();
    let etas: Vec<f64> = sweep.iter().map(|s| s.efficiency).collect();
    let tc = fit_decay_constant(&taus, &etas).unwrap();
    let target = 1.0 / (2.0 * TWO_PI * p.gamma_01());
    let secs = started.elapsed().as_secs_f64();
    outcome(
        eta > 0.05 && within(tc, target, 0.3) && secs < 60.0,
        format!("eta(0.5 us) {eta:.4} (> 0.05); decay constant {tc:.3} us vs {target:.3} (tol 30%); {secs:.1} s"),
    )
}

fn c10_aic() -> Outcome {
    let p = table();
    let settings = SweepSettings {
        omega_grid: linspace(-30.0, 30.0, 201),
        noise_sigma: 0.01,
        seed: fluxeit_core::config::DEFAULT_SEED,
        replicas: 16,
        rotate_out_mismatch: false,
        starts: 0,
    };
    let anchors = aic_weight_curve(&p, &[6.54, 20.52], &settings).unwrap();
    let curve = aic_weight_curve(&p, &linspace(0.5, 25.0, 50), &settings).unwrap();
    let cross = find_crossover(&curve);
    let ok = anchors[0].w_eit > 0.5 && anchors[1].w_ats > 0.5 && cross.is_some_and(|c| (8.0..=20.0).contains(&c));
    outcome(
        ok,
        format!(
            "w_EIT(6.54) {:.4}, w_ATS(20.52) {:.4}, crossover {} MHz (bracket [8, 20])",
            anchors[0].w_eit,
            anchors[1].w_ats,
            cross.map_or("none".to_string(), |c| format!("{c:.2}"))
        ),
    )
}

fn random_params(rng: &mut ChaCha8Rng) -> (LambdaParams, DriveParams) {
    let params = LambdaParams {
        gamma_r_02: rng.random_range(1.0..20.0),
        gamma_r_12: rng.random_range(0.5..5.0),
        gamma_r_01: rng.random_range(0.2..1.0),
        gamma_r_10: rng.random_range(0.2..1.0),
        gamma_phi_11: rng.random_range(0.05..0.5),
        gamma_phi_22: rng.random_range(0.05..0.5),
        mismatch_phase: rng.random_range(-0.5..0.5),
        ..table()
    };
    let drive = DriveParams::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(0.1..2.0),
        rng.random_range(0.5..5.0),
    )
    .unwrap();
    (params, drive)
}

fn c11_solver() -> Outcome {
    // Driven 10 µs runs: Gaussian probe plus a switched control.
    let mut drift: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..4 {
        let (params, drive) = if k == 0 {
            (table(), DriveParams::new(0.0, 0.0, 1.0, 2.6).unwrap())
        } else {
            random_params(&mut rng)
        };
        let (wp, wc) = (drive.omega_p, drive.omega_c);
        let schedule = DriveSchedule::new(
            move |t| wp * (-(t - 5.0) * (t - 5.0) / 2.0).exp(),
            move |t| if t < 6.0 { wc } else { 0.0 },
            drive.delta_p,
            drive.delta_c,
        );
        let traj = evolve(&DensityMatrix3::ground(), &params, &schedule, &TimeGrid::new(0.0, 0.01, 1001).unwrap())
            .unwrap();
        drift = drift.max(traj.max_trace_drift);
        min_eig = traj.states.iter().map(|s| s.min_eigenvalue()).fold(min_eig, f64::min);
    }

    // Steady state against long constant-drive evolution.
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (params, drive) = random_params(&mut rng);
        let l = Liouvillian::build(&params, &drive);
        let slowest = l
            .eigenvalues()
            .iter()
            .map(|e| -e.re)
            .filter(|&r| r > 1e-9)
            .fold(f64::INFINITY, f64::min);
        let span = 30.0 / slowest;
        let grid = TimeGrid::spanning(0.0, span, span / 10.0).unwrap();
        let traj = evolve(&DensityMatrix3::ground(), &params, &DriveSchedule::constant(&drive), &grid).unwrap();
        let ss = steady_state(&l).unwrap();
        worst = worst.max(traj.last().max_abs_diff(&ss));
    }
    outcome(
        drift < 1e-8 && min_eig > -1e-8 && worst < 1e-6,
        format!("trace drift {drift:.1e}, min eigenvalue {min_eig:.1e}, steady vs evolve {worst:.1e} over 20 sets"),
    )
}

fn run_figures(dir: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_fluxeit"))
        .args(["--seed", "1729", "--out"])
        .arg(dir)
        .arg("figures")
        .stdout(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("figures exited with {status}"))
    }
}

fn c12_determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    if let Err(e) = run_figures(a.path()).and_then(|_| run_figures(b.path())) {
        return outcome(false, e);
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n != "manifest.json")
        .collect();
    names.sort();
    let differing: Vec<_> = names
        .iter()
        .filter(|n| std::fs::read(a.path().join(n)).ok() != std::fs::read(b.path().join(n)).ok())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    outcome(
        names.len() == 5 && differing.is_empty(),
        format!("{} data files compared byte for byte; differing: {:?}", names.len(), differing),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("spectrum reproduction", c1_spectrum),
        ("oscillator-limit exactness", c2_oscillator_limit),
        ("decoherence relation", c3_decoherence_relation),
        ("extinction anchor", c4_extinction),
        ("dark-state transparency", c5_dark_state),
        ("EIT/ATS threshold", c6_threshold),
        ("slow light", c7_slow_light),
        ("fast light", c8_fast_light),
        ("storage", c9_storage),
        ("AIC regimes", c10_aic),
        ("solver properties", c11_solver),
        ("determinism", c12_determinism),
    ];
    // ACCEPTANCE_ONLY=4,7 runs a subset.
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|n| n.trim().parse().ok()).collect());
    let (mut failures, mut ran) = (0, 0);
    for (k, (name, check)) in criteria.iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(k + 1))) {
            continue;
        }
        ran += 1;
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failures += 1;
        }
        println!(
            "{} [{:>2}] {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            k + 1,
            result.detail
        );
    }
    println!("acceptance: {} passed, {failures} failed", ran - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
