//! Waveguide transmission of the probe and the quantities derived from it.
//!
//! The atom radiates into the waveguide through the probe coherence
//! `ρ_20 = ⟨σ_02⟩`; the transmitted field relative to the input is
//! `t = 1 + i·e^{iφ}·(Γ_02/Ω_p)·ρ_20`, with `φ` the impedance-mismatch
//! phase applied to the scattered part only. With `φ = 0` a radiatively
//! limited two-level atom on resonance reflects everything (`t = 0`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{steady_state_for, DensityMatrix3, DriveParams, LambdaParams};
use crate::units::{angular, db_amplitude_factor, us_to_ns};
use crate::C64;

/// Probe amplitude (MHz) used for linear-response spectroscopy.
pub const WEAK_PROBE_MHZ: f64 = 1e-3;

/// Below this modulus the phase of `t` is treated as undefined.
pub const PHASE_FLOOR: f64 = 1e-6;

/// Control Rabi amplitude (MHz) reached at −157 dBm with the default
/// calibration, inside the EIT regime for the canonical rates.
pub const DEFAULT_CAL_OMEGA_C_MHZ: f64 = 2.6;
pub const DEFAULT_CAL_POWER_DBM: f64 = -157.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionPoint {
    /// Probe detuning, MHz.
    pub delta_p: f64,
    pub t: C64,
}

/// The coherence that couples to the waveguide.
pub fn probe_coherence(rho: &DensityMatrix3) -> C64 {
    rho.get(2, 0)
}

/// `t = 1 + i·e^{iφ}·(Γ_02/Ω_p)·ρ_coh`.
pub fn transmission_from_state(rho_coh: C64, omega_p: f64, params: &LambdaParams) -> Result<C64> {
    if !(omega_p > 0.0) {
        return Err(Error::ZeroProbe);
    }
    let scattered = C64::i() * C64::from_polar(1.0, params.mismatch_phase) * (params.gamma_r_02 / omega_p);
    Ok(C64::new(1.0, 0.0) + scattered * rho_coh)
}

/// Removes the mismatch rotation from the scattered part:
/// `1 + e^{−iφ}(t − 1)`.
pub fn remove_mismatch(t: C64, params: &LambdaParams) -> C64 {
    C64::new(1.0, 0.0) + (t - 1.0) * C64::from_polar(1.0, -params.mismatch_phase)
}

/// Steady-state transmission for a constant drive.
pub fn transmission(params: &LambdaParams, drive: &DriveParams) -> Result<C64> {
    let rho = steady_state_for(params, drive)?;
    transmission_from_state(probe_coherence(&rho), drive.omega_p, params)
}

fn check_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Grid(format!("{what} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Grid(format!("{what} grid contains non-finite values")));
    }
    Ok(())
}

/// Steady-state transmission at each probe detuning of `grid`; the drive's
/// own `delta_p` is ignored.
pub fn eit_spectrum(
    params: &LambdaParams,
    drive: &DriveParams,
    grid: &[f64],
) -> Result<Vec<TransmissionPoint>> {
    check_grid(grid, "detuning")?;
    params.validate()?;
    drive.validate()?;
    if !drive.is_weak_probe(params) {
        return Err(Error::invalid(
            "omega_p",
            format!(
                "{} MHz is not a weak probe (needs < {:.4} MHz)",
                drive.omega_p,
                0.1 * params.gamma_02()
            ),
        ));
    }
    grid.par_iter()
        .map(|&delta_p| {
            transmission(params, &drive.with_delta_p(delta_p))
                .map(|t| TransmissionPoint { delta_p, t })
                .map_err(|e| Error::AtDetuning {
                    delta_p,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// Rough width (MHz) of the transparency window, `Ω_c²/γ_02 + 2γ_01`.
pub fn window_width_estimate(params: &LambdaParams, omega_c: f64) -> f64 {
    omega_c * omega_c / params.gamma_02() + 2.0 * params.gamma_01()
}

/// Whether a detuning step puts at least 20 samples across the window.
pub fn resolves_window(step: f64, params: &LambdaParams, omega_c: f64) -> bool {
    step <= window_width_estimate(params, omega_c) / 20.0
}

/// Detuning of the local maximum of `|t|` nearest to `near` (typically
/// the two-photon resonance `Δ_c`), refined by a parabola through the three
/// samples around it.
pub fn window_center(spectrum: &[TransmissionPoint], near: f64) -> Option<f64> {
    let mags: Vec<f64> = spectrum.iter().map(|p| p.t.norm()).collect();
    let n = mags.len();
    if n < 3 {
        return None;
    }
    let best = (1..n - 1)
        .filter(|&i| mags[i] >= mags[i - 1] && mags[i] >= mags[i + 1])
        .min_by(|&a, &b| {
            (spectrum[a].delta_p - near)
                .abs()
                .total_cmp(&(spectrum[b].delta_p - near).abs())
        })?;
    let (y0, y1, y2) = (mags[best - 1], mags[best], mags[best + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    let h = spectrum[best + 1].delta_p - spectrum[best].delta_p;
    let offset = if denom.abs() > 0.0 {
        (0.5 * (y0 - y2) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Some(spectrum[best].delta_p + offset * h)
}

/// Index range `[lo, hi]` of the `|t|` lobe containing the local maximum at
/// index `peak`: it extends to the adjacent local minima.
pub fn lobe_around(spectrum: &[TransmissionPoint], peak: usize) -> (usize, usize) {
    let mags: Vec<f64> = spectrum.iter().map(|p| p.t.norm()).collect();
    let mut lo = peak;
    while lo > 0 && mags[lo - 1] <= mags[lo] {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < mags.len() && mags[hi + 1] <= mags[hi] {
        hi += 1;
    }
    (lo, hi)
}

/// Maps control power to Rabi amplitude: `Ω_c = k0·10^(P_c/20)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerCalibration {
    /// Rabi amplitude (MHz) extrapolated to 0 dBm.
    pub k0: f64,
}

impl Default for PowerCalibration {
    fn default() -> Self {
        Self::through(DEFAULT_CAL_POWER_DBM, DEFAULT_CAL_OMEGA_C_MHZ)
    }
}

impl PowerCalibration {
    pub fn new(k0: f64) -> Result<Self> {
        if !(k0 > 0.0 && k0.is_finite()) {
            return Err(Error::invalid("k0", "calibration constant must be positive"));
        }
        Ok(Self { k0 })
    }

    /// Calibration passing through `(power_dbm, omega_c)`.
    pub fn through(power_dbm: f64, omega_c: f64) -> Self {
        Self {
            k0: omega_c / db_amplitude_factor(power_dbm),
        }
    }

    /// `P_c = −∞` maps to `Ω_c = 0`.
    pub fn omega_c(&self, power_dbm: f64) -> f64 {
        if power_dbm == f64::NEG_INFINITY {
            return 0.0;
        }
        self.k0 * db_amplitude_factor(power_dbm)
    }
}

/// Transmission over a (power, detuning) grid; one row per power.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMap {
    pub pc_dbm: Vec<f64>,
    pub delta_p: Vec<f64>,
    pub rows: Vec<Vec<C64>>,
}

impl PowerMap {
    pub fn abs_rows(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|t| t.norm()).collect())
            .collect()
    }
}

pub fn power_map(
    params: &LambdaParams,
    drive: &DriveParams,
    delta_grid: &[f64],
    pc_grid: &[f64],
    cal: &PowerCalibration,
) -> Result<PowerMap> {
    if pc_grid.is_empty() || pc_grid.iter().any(|p| p.is_nan() || *p == f64::INFINITY) {
        return Err(Error::Grid("power grid is empty or invalid".into()));
    }
    let rows = pc_grid
        .iter()
        .map(|&pc| {
            let row = eit_spectrum(params, &drive.with_omega_c(cal.omega_c(pc)), delta_grid)?;
            Ok(row.into_iter().map(|p| p.t).collect())
        })
        .collect::<Result<Vec<Vec<C64>>>>()?;
    Ok(PowerMap {
        pc_dbm: pc_grid.to_vec(),
        delta_p: delta_grid.to_vec(),
        rows,
    })
}

/// Group delay per detuning, ns. `None` where `|t|` is too small for the
/// phase to be defined.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayCurve {
    pub delta_p: Vec<f64>,
    pub tau_d: Vec<Option<f64>>,
}

impl DelayCurve {
    /// `(Δ_p, τ_d)` of the largest valid delay.
    pub fn max(&self) -> Option<(f64, f64)> {
        self.valid().max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn min(&self) -> Option<(f64, f64)> {
        self.valid().min_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn valid(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.delta_p
            .iter()
            .zip(&self.tau_d)
            .filter_map(|(&d, t)| t.map(|t| (d, t)))
    }

    /// Linear interpolation of the delay at `delta_p`.
    pub fn at(&self, delta_p: f64) -> Option<f64> {
        let i = self.delta_p.partition_point(|&d| d <= delta_p);
        if i == 0 || i >= self.delta_p.len() {
            return None;
        }
        let (d0, d1) = (self.delta_p[i - 1], self.delta_p[i]);
        let (t0, t1) = (self.tau_d[i - 1]?, self.tau_d[i]?);
        Some(t0 + (t1 - t0) * (delta_p - d0) / (d1 - d0))
    }
}

/// Unwraps a phase sequence by removing jumps larger than π.
pub fn unwrap_phase(phases: &[f64]) -> Vec<f64> {
    use std::f64::consts::{PI, TAU};
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    for (k, &p) in phases.iter().enumerate() {
        if k > 0 {
            let prev = phases[k - 1];
            let jump = p - prev;
            if jump > PI {
                offset -= TAU * ((jump - PI) / TAU).ceil();
            } else if jump < -PI {
                offset += TAU * ((-jump - PI) / TAU).ceil();
            }
        }
        out.push(p + offset);
    }
    out
}

fn check_uniform(grid: &[f64]) -> Result<f64> {
    let step = grid[1] - grid[0];
    if !(step > 0.0) {
        return Err(Error::Grid("detuning grid must be strictly ascending".into()));
    }
    for w in grid.windows(2) {
        let s = w[1] - w[0];
        if !(s > 0.0) || (s - step).abs() > 1e-6 * step {
            return Err(Error::Grid("detuning grid must be uniform".into()));
        }
    }
    Ok(step)
}

/// `τ_d = −d Arg(t)/dω_p` by central differences of the unwrapped phase
/// (one-sided at the ends and next to invalid points), in ns.
pub fn group_delay(spectrum: &[TransmissionPoint]) -> Result<DelayCurve> {
    if spectrum.len() < 3 {
        return Err(Error::Grid("group delay needs at least 3 points".into()));
    }
    let grid: Vec<f64> = spectrum.iter().map(|p| p.delta_p).collect();
    check_uniform(&grid)?;
    let valid: Vec<bool> = spectrum.iter().map(|p| p.t.norm() >= PHASE_FLOOR).collect();

    // Unwrap across valid points only.
    let idx: Vec<usize> = (0..spectrum.len()).filter(|&i| valid[i]).collect();
    let raw: Vec<f64> = idx.iter().map(|&i| spectrum[i].t.arg()).collect();
    let unwrapped = unwrap_phase(&raw);
    let mut phase = vec![f64::NAN; spectrum.len()];
    for (&i, &p) in idx.iter().zip(&unwrapped) {
        phase[i] = p;
    }

    let n = spectrum.len();
    let slope = |a: usize, b: usize| -> f64 {
        // rad per (rad/µs) = µs
        -(phase[b] - phase[a]) / angular(grid[b] - grid[a])
    };
    let tau_d = (0..n)
        .map(|i| {
            if !valid[i] {
                return None;
            }
            let left = i > 0 && valid[i - 1];
            let right = i + 1 < n && valid[i + 1];
            let tau = match (left, right) {
                (true, true) => slope(i - 1, i + 1),
                (false, true) => slope(i, i + 1),
                (true, false) => slope(i - 1, i),
                (false, false) => return None,
            };
            Some(us_to_ns(tau))
        })
        .collect();
    Ok(DelayCurve {
        delta_p: grid,
        tau_d,
    })
}

/// Control amplitude (MHz) separating EIT from ATS: `γ_02 − γ_01`.
///
/// May be negative for pathological rate sets; it is returned as is.
pub fn eit_threshold(params: &LambdaParams) -> f64 {
    params.gamma_02() - params.gamma_01()
}

/// Uniform grid of `n` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}
