//! Time-domain probe pulses: slow/fast light and storage by switching the
//! control field off and on again.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{evolve, DensityMatrix3, DriveSchedule, LambdaParams, TimeGrid, Trajectory};
use crate::scattering::probe_coherence;
use crate::units::{us_to_ns, TWO_PI};
use crate::C64;

/// Carrier detuning (MHz) of the far-detuned reference pulse.
pub const REFERENCE_DETUNING_MHZ: f64 = 500.0;

/// Default switching timescale, µs.
pub const DEFAULT_RAMP_US: f64 = 0.02;

/// Gaussian probe `Ω_p(t) = amplitude·exp(−(t − center)²/2σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// µs
    pub sigma: f64,
    /// Peak Rabi amplitude, MHz.
    pub amplitude: f64,
    /// µs
    pub center: f64,
    /// Δ_p, MHz.
    pub carrier_detuning: f64,
}

impl PulseSpec {
    pub fn new(sigma: f64, amplitude: f64, center: f64, carrier_detuning: f64) -> Result<Self> {
        let p = Self {
            sigma,
            amplitude,
            center,
            carrier_detuning,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma", "must be positive"));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::invalid("amplitude", "must be non-negative"));
        }
        if !self.center.is_finite() || !self.carrier_detuning.is_finite() {
            return Err(Error::invalid("center", "must be finite"));
        }
        Ok(())
    }

    pub fn envelope(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.sigma;
        self.amplitude * (-0.5 * x * x).exp()
    }

    pub fn with_detuning(&self, carrier_detuning: f64) -> Self {
        Self {
            carrier_detuning,
            ..*self
        }
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self { amplitude, ..*self }
    }

    /// Output grid from `center − span·σ` to `end` with the given step.
    pub fn grid_until(&self, span: f64, end: f64, step: f64) -> Result<TimeGrid> {
        TimeGrid::spanning(self.center - span * self.sigma, end, step)
    }

    /// Symmetric grid of `±span·σ` around the center.
    pub fn grid(&self, span: f64, step: f64) -> Result<TimeGrid> {
        self.grid_until(span, self.center + span * self.sigma, step)
    }
}

/// Smooth unit step `½(1 + tanh 2x)`; its slope never exceeds 1.
pub fn smooth_step(x: f64) -> f64 {
    0.5 * (1.0 + (2.0 * x).tanh())
}

/// Control switched from `omega_c_high` to zero at `t_off` and back after
/// `tau_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageSchedule {
    /// MHz
    pub omega_c_high: f64,
    /// µs
    pub t_off: f64,
    /// µs
    pub tau_s: f64,
    /// µs
    pub ramp: f64,
}

impl StorageSchedule {
    pub fn new(omega_c_high: f64, t_off: f64, tau_s: f64, ramp: f64) -> Result<Self> {
        let s = Self {
            omega_c_high,
            t_off,
            tau_s,
            ramp,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c_high >= 0.0 && self.omega_c_high.is_finite()) {
            return Err(Error::invalid("omega_c_high", "must be non-negative"));
        }
        if !(self.tau_s >= 0.0 && self.tau_s.is_finite()) {
            return Err(Error::invalid("tau_s", "must be non-negative"));
        }
        if !(self.ramp > 0.0 && self.ramp.is_finite()) {
            return Err(Error::invalid("ramp", "must be positive"));
        }
        if !self.t_off.is_finite() {
            return Err(Error::invalid("t_off", "must be finite"));
        }
        Ok(())
    }

    pub fn with_tau_s(&self, tau_s: f64) -> Self {
        Self { tau_s, ..*self }
    }

    pub fn control(&self, t: f64) -> f64 {
        let off = smooth_step((self.t_off - t) / self.ramp);
        let on = smooth_step((t - self.t_off - self.tau_s) / self.ramp);
        self.omega_c_high * (off + on).clamp(0.0, 1.0)
    }

    /// Upper bound on `|dΩ_c/dt|`.
    pub fn max_slope(&self) -> f64 {
        self.omega_c_high / self.ramp
    }

    /// `[t_off + τ_s, t_off + τ_s + 6·ramp + 4σ]`.
    pub fn retrieval_window(&self, probe: &PulseSpec) -> (f64, f64) {
        let start = self.t_off + self.tau_s;
        (start, start + 6.0 * self.ramp + 4.0 * probe.sigma)
    }

    /// Grid from `center − 5σ` to one probe width past the retrieval window.
    pub fn grid(&self, probe: &PulseSpec, step: f64) -> Result<TimeGrid> {
        let (_, end) = self.retrieval_window(probe);
        probe.grid_until(5.0, end + probe.sigma, step)
    }
}

/// Input and output envelopes (Rabi units, MHz) on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseRecord {
    pub times: Vec<f64>,
    pub input: Vec<C64>,
    pub output: Vec<C64>,
    /// Control amplitude, MHz.
    pub control: Vec<f64>,
}

fn trapezoid(times: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    times
        .windows(2)
        .zip(v.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

impl PulseRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `∫|V_in|² dt`, MHz²·µs.
    pub fn input_energy(&self) -> f64 {
        trapezoid(&self.times, self.input.iter().map(|v| v.norm_sqr()))
    }

    pub fn output_energy(&self) -> f64 {
        trapezoid(&self.times, self.output.iter().map(|v| v.norm_sqr()))
    }

    /// Output energy restricted to `[a, b]` (samples inside, inclusive).
    pub fn output_energy_in(&self, window: (f64, f64)) -> f64 {
        let (a, b) = window;
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| self.times[i] >= a - 1e-12 && self.times[i] <= b + 1e-12)
            .collect();
        let t: Vec<f64> = idx.iter().map(|&i| self.times[i]).collect();
        trapezoid(&t, idx.iter().map(|&i| self.output[i].norm_sqr()))
    }

    /// Energy-weighted mean time of the output, µs.
    pub fn output_centroid(&self) -> Result<f64> {
        let e = self.output_energy();
        if !(e > 0.0) {
            return Err(Error::ZeroEnergy);
        }
        let m = trapezoid(
            &self.times,
            self.times.iter().zip(&self.output).map(|(t, v)| t * v.norm_sqr()),
        );
        Ok(m / e)
    }

    /// Same sample times as `other`.
    pub fn same_grid(&self, other: &PulseRecord) -> bool {
        self.len() == other.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + a.abs()))
    }
}

/// Evolves from `|0⟩⟨0|` under the Gaussian probe and the given control
/// envelope. The output is `V_out = Ω_p + i·e^{iφ}·Γ_02·ρ_20`.
pub fn propagate_pulse(
    params: &LambdaParams,
    probe: &PulseSpec,
    control: impl Fn(f64) -> f64 + Send + Sync + 'static,
    delta_c: f64,
    grid: &TimeGrid,
) -> Result<PulseRecord> {
    propagate_with_trajectory(params, probe, control, delta_c, grid).map(|(r, _)| r)
}

/// As [`propagate_pulse`], also returning the density-matrix trajectory.
pub fn propagate_with_trajectory(
    params: &LambdaParams,
    probe: &PulseSpec,
    control: impl Fn(f64) -> f64 + Send + Sync + 'static,
    delta_c: f64,
    grid: &TimeGrid,
) -> Result<(PulseRecord, Trajectory)> {
    params.validate()?;
    probe.validate()?;
    let margin = 4.0 * probe.sigma;
    if grid.start > probe.center - margin + 1e-9 || grid.end() < probe.center + margin - 1e-9 {
        return Err(Error::Grid(format!(
            "grid [{}, {}] does not cover ±4σ around the pulse",
            grid.start,
            grid.end()
        )));
    }
    let p = *probe;
    let schedule = DriveSchedule::new(move |t| p.envelope(t), control, probe.carrier_detuning, delta_c);
    let traj = evolve(&DensityMatrix3::ground(), params, &schedule, grid)?;
    let scatter = C64::i() * C64::from_polar(1.0, params.mismatch_phase) * params.gamma_r_02;
    let input: Vec<C64> = traj.times.iter().map(|&t| C64::new(schedule.omega_p(t), 0.0)).collect();
    let output = input
        .iter()
        .zip(&traj.states)
        .map(|(v, rho)| v + scatter * probe_coherence(rho))
        .collect();
    let control = traj.times.iter().map(|&t| schedule.omega_c(t)).collect();
    let record = PulseRecord {
        times: traj.times.clone(),
        input,
        output,
        control,
    };
    Ok((record, traj))
}

/// The same pulse propagated far off resonance without control.
pub fn reference_pulse(params: &LambdaParams, probe: &PulseSpec, grid: &TimeGrid) -> Result<PulseRecord> {
    propagate_pulse(
        params,
        &probe.with_detuning(REFERENCE_DETUNING_MHZ),
        |_| 0.0,
        0.0,
        grid,
    )
}

/// Centroid delay of `test` relative to `reference`, ns.
pub fn extract_delay(reference: &PulseRecord, test: &PulseRecord) -> Result<f64> {
    if !reference.same_grid(test) {
        return Err(Error::Grid("records are on different grids".into()));
    }
    Ok(us_to_ns(test.output_centroid()? - reference.output_centroid()?))
}

/// Peak time of `|V_out|` from a Gaussian fit (a parabola in `ln|V|²`)
/// over the samples above half the maximum power, µs.
pub fn peak_time(record: &PulseRecord) -> Result<f64> {
    let power: Vec<f64> = record.output.iter().map(|v| v.norm_sqr()).collect();
    let (imax, &pmax) = power
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::ZeroEnergy)?;
    if !(pmax > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    let mut lo = imax;
    while lo > 0 && power[lo - 1] >= 0.5 * pmax {
        lo -= 1;
    }
    let mut hi = imax;
    while hi + 1 < power.len() && power[hi + 1] >= 0.5 * pmax {
        hi += 1;
    }
    lo = lo.saturating_sub(1);
    hi = (hi + 1).min(power.len() - 1);
    let t0 = record.times[imax];
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    for (&t, &p) in record.times[lo..=hi].iter().zip(&power[lo..=hi]) {
        if p <= 0.0 {
            continue;
        }
        let x = t - t0;
        let row = Vector3::new(1.0, x, x * x);
        ata += row * row.transpose();
        atb += row * p.ln();
    }
    let fallback = Ok(t0);
    let Some(c) = ata.lu().solve(&atb) else {
        return fallback;
    };
    if !(c[2] < 0.0) {
        return fallback;
    }
    Ok(t0 - c[1] / (2.0 * c[2]))
}

/// Peak-fit delay of `test` relative to `reference`, ns.
pub fn extract_peak_delay(reference: &PulseRecord, test: &PulseRecord) -> Result<f64> {
    if !reference.same_grid(test) {
        return Err(Error::Grid("records are on different grids".into()));
    }
    Ok(us_to_ns(peak_time(test)? - peak_time(reference)?))
}

/// A storage run with its retrieval window.
#[derive(Debug, Clone)]
pub struct StorageRun {
    pub record: PulseRecord,
    pub window: (f64, f64),
    pub trajectory: Trajectory,
}

pub fn run_storage(
    params: &LambdaParams,
    probe: &PulseSpec,
    schedule: &StorageSchedule,
    grid: &TimeGrid,
) -> Result<StorageRun> {
    schedule.validate()?;
    let window = schedule.retrieval_window(probe);
    let (g0, g1) = (grid.start, grid.end());
    if schedule.t_off < g0 || window.0 < g0 || window.1 > g1 + 1e-9 {
        return Err(Error::WindowOutsideGrid {
            start: window.0,
            end: window.1,
            grid_start: g0,
            grid_end: g1,
        });
    }
    let s = *schedule;
    let (record, trajectory) = propagate_with_trajectory(params, probe, move |t| s.control(t), 0.0, grid)?;
    Ok(StorageRun {
        record,
        window,
        trajectory,
    })
}

/// `η = ∫_window |V_out,stored|² / ∫ |V_out,reference|²`.
pub fn storage_efficiency(reference: &PulseRecord, stored: &PulseRecord, window: (f64, f64)) -> Result<f64> {
    if !reference.same_grid(stored) {
        return Err(Error::Grid("records are on different grids".into()));
    }
    let e_ref = reference.output_energy();
    if !(e_ref > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    Ok(stored.output_energy_in(window) / e_ref)
}

/// One point of an efficiency-versus-storage-time sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoragePoint {
    pub tau_s: f64,
    pub efficiency: f64,
}

/// η for each storage time; every run gets its own grid and reference.
pub fn storage_sweep(
    params: &LambdaParams,
    probe: &PulseSpec,
    schedule: &StorageSchedule,
    taus: &[f64],
    step: f64,
) -> Result<Vec<StoragePoint>> {
    taus.par_iter()
        .map(|&tau_s| {
            let s = schedule.with_tau_s(tau_s);
            let grid = s.grid(probe, step)?;
            let reference = reference_pulse(params, probe, &grid)?;
            let run = run_storage(params, probe, &s, &grid)?;
            Ok(StoragePoint {
                tau_s,
                efficiency: storage_efficiency(&reference, &run.record, run.window)?,
            })
        })
        .collect()
}

/// Exponential decay constant (same time unit as the input) from a
/// log-linear least-squares fit of `values` against `times`.
pub fn fit_decay_constant(times: &[f64], values: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Data("need two positive samples for a decay fit".into()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::Data("values do not decay".into()));
    }
    Ok(-1.0 / slope)
}

/// Decay rate (rad/µs) of `|ρ_01|` over `[t0, t1]` of a trajectory.
pub fn coherence_decay_rate(traj: &Trajectory, t0: f64, t1: f64) -> Result<f64> {
    let (times, mags): (Vec<f64>, Vec<f64>) = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(&t, _)| t >= t0 && t <= t1)
        .map(|(&t, s)| (t, s.get(0, 1).norm()))
        .unzip();
    fit_decay_constant(&times, &mags).map(|tau| 1.0 / tau)
}

/// `⟨N⟩ = ∫(2πΩ_p)² dt / (2·2πΓ_02)` from envelope samples (MHz) on a
/// uniform step (µs).
pub fn mean_photon_number(envelope: &[f64], step: f64, gamma_r_02: f64) -> f64 {
    if envelope.is_empty() {
        return 0.0;
    }
    let times: Vec<f64> = (0..envelope.len()).map(|k| k as f64 * step).collect();
    let energy = trapezoid(&times, envelope.iter().map(|v| v * v));
    TWO_PI * energy / (2.0 * gamma_r_02)
}

/// Closed form of [`mean_photon_number`] for a Gaussian probe.
pub fn gaussian_photon_number(probe: &PulseSpec, gamma_r_02: f64) -> f64 {
    let energy = probe.amplitude.powi(2) * std::f64::consts::PI.sqrt() * probe.sigma;
    TWO_PI * energy / (2.0 * gamma_r_02)
}

/// Gaussian peak amplitude (MHz) giving `n` photons on average.
pub fn amplitude_for_photon_number(n: f64, sigma: f64, gamma_r_02: f64) -> f64 {
    (n * 2.0 * gamma_r_02 / (TWO_PI * std::f64::consts::PI.sqrt() * sigma)).sqrt()
}
