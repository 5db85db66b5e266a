use std::fmt;
use std::sync::Arc;

use super::density::{DensityMatrix3, Vec9};
use super::liouvillian::{Liouvillian, Superop};
use super::params::{DriveParams, LambdaParams};
use crate::error::{Error, Result};
use crate::units::angular;
use crate::C64;

/// Internal steps per inverse fastest angular rate.
const STEPS_PER_RATE: f64 = 50.0;
/// Largest admissible `step · f_max`.
const MAX_STEP_RATE_PRODUCT: f64 = 0.1;

pub type Envelope = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Uniform output grid `start + k·step`, `k = 0..len`, in µs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || !start.is_finite() {
            return Err(Error::Grid(format!("invalid start {start} / step {step}")));
        }
        if len == 0 {
            return Err(Error::Grid("time grid is empty".into()));
        }
        Ok(Self { start, step, len })
    }

    /// Grid covering `[start, end]` with the given step; the last point is
    /// the first grid point at or beyond `end`.
    pub fn spanning(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(end >= start) {
            return Err(Error::Grid(format!("end {end} precedes start {start}")));
        }
        let len = ((end - start) / step - 1e-9).ceil().max(0.0) as usize + 1;
        Self::new(start, step, len)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start + self.step * k as f64
    }

    pub fn end(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.time(k)).collect()
    }
}

/// Time-dependent Rabi envelopes (MHz, argument in µs) with constant
/// detunings (MHz).
#[derive(Clone)]
pub struct DriveSchedule {
    omega_p_env: Envelope,
    omega_c_env: Envelope,
    pub delta_p: f64,
    pub delta_c: f64,
}

impl fmt::Debug for DriveSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriveSchedule")
            .field("delta_p", &self.delta_p)
            .field("delta_c", &self.delta_c)
            .finish_non_exhaustive()
    }
}

impl DriveSchedule {
    pub fn new(
        omega_p_env: impl Fn(f64) -> f64 + Send + Sync + 'static,
        omega_c_env: impl Fn(f64) -> f64 + Send + Sync + 'static,
        delta_p: f64,
        delta_c: f64,
    ) -> Self {
        Self {
            omega_p_env: Arc::new(omega_p_env),
            omega_c_env: Arc::new(omega_c_env),
            delta_p,
            delta_c,
        }
    }

    pub fn from_envelopes(omega_p_env: Envelope, omega_c_env: Envelope, delta_p: f64, delta_c: f64) -> Self {
        Self {
            omega_p_env,
            omega_c_env,
            delta_p,
            delta_c,
        }
    }

    pub fn constant(drive: &DriveParams) -> Self {
        let (p, c) = (drive.omega_p, drive.omega_c);
        Self::new(move |_| p, move |_| c, drive.delta_p, drive.delta_c)
    }

    pub fn omega_p(&self, t: f64) -> f64 {
        (self.omega_p_env)(t)
    }

    pub fn omega_c(&self, t: f64) -> f64 {
        (self.omega_c_env)(t)
    }

    pub fn probe_envelope(&self) -> Envelope {
        Arc::clone(&self.omega_p_env)
    }

    pub fn control_envelope(&self) -> Envelope {
        Arc::clone(&self.omega_c_env)
    }

    fn sample(&self, t: f64) -> Result<(f64, f64)> {
        let p = self.omega_p(t);
        let c = self.omega_c(t);
        if !p.is_finite() || !c.is_finite() {
            return Err(Error::NonFiniteEnvelope { t });
        }
        Ok((p, c))
    }
}

/// Density matrices on a [`TimeGrid`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Output samples, Hermitian with populations summing to one.
    pub states: Vec<DensityMatrix3>,
    /// Internal RK4 step in µs.
    pub step: f64,
    /// Largest `|tr ρ − 1|` of the raw integrator state.
    pub max_trace_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &DensityMatrix3 {
        self.states.last().expect("trajectory is never empty")
    }

    /// `(t, ρ_ij(t))` series of one matrix element.
    pub fn element(&self, row: usize, col: usize) -> Vec<C64> {
        self.states.iter().map(|s| s.get(row, col)).collect()
    }
}

/// `L(t) = L0 + Ω_p(t)·L_p + Ω_c(t)·L_c`, all in rad/µs with Rabi
/// amplitudes in MHz.
struct AffineGenerator {
    base: Superop,
    per_probe: Superop,
    per_control: Superop,
}

impl AffineGenerator {
    fn new(params: &LambdaParams, delta_p: f64, delta_c: f64) -> Self {
        let detuned = DriveParams {
            delta_p,
            delta_c,
            omega_p: 0.0,
            omega_c: 0.0,
        };
        let unit_p = DriveParams {
            omega_p: 1.0,
            ..DriveParams::default()
        };
        let unit_c = DriveParams {
            omega_c: 1.0,
            ..DriveParams::default()
        };
        Self {
            base: Liouvillian::dissipative_part(params) + Liouvillian::coherent_part(&detuned),
            per_probe: Liouvillian::coherent_part(&unit_p),
            per_control: Liouvillian::coherent_part(&unit_c),
        }
    }

    #[inline]
    fn apply(&self, omega_p: f64, omega_c: f64, v: &Vec9) -> Vec9 {
        let mut out = self.base * v;
        if omega_p != 0.0 {
            out += (self.per_probe * v) * C64::new(omega_p, 0.0);
        }
        if omega_c != 0.0 {
            out += (self.per_control * v) * C64::new(omega_c, 0.0);
        }
        out
    }
}

/// Largest angular frequency in the problem (rad/µs): rates, sampled Rabi
/// amplitudes and detunings.
fn fastest_rate(params: &LambdaParams, schedule: &DriveSchedule, grid: &TimeGrid) -> Result<f64> {
    let mut f_max = params
        .max_rate()
        .max(schedule.delta_p.abs())
        .max(schedule.delta_c.abs())
        .max((schedule.delta_p - schedule.delta_c).abs());
    for k in 0..grid.len {
        let t = grid.time(k);
        let (p, c) = schedule.sample(t)?;
        f_max = f_max.max(p.abs()).max(c.abs());
        if k + 1 < grid.len {
            let (p, c) = schedule.sample(t + 0.5 * grid.step)?;
            f_max = f_max.max(p.abs()).max(c.abs());
        }
    }
    Ok(angular(f_max))
}

/// Integrates `dρ/dt = L(t)ρ` with classical RK4 on an automatically
/// chosen internal step `≤ 1/(50·f_max)`; output on `grid`.
pub fn evolve(
    rho0: &DensityMatrix3,
    params: &LambdaParams,
    schedule: &DriveSchedule,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let f_max = fastest_rate(params, schedule, grid)?;
    let substeps = if f_max == 0.0 {
        1
    } else {
        (grid.step * f_max * STEPS_PER_RATE).ceil().max(1.0) as usize
    };
    integrate(rho0, params, schedule, grid, substeps)
}

/// As [`evolve`] with a caller-chosen internal step, which must divide the
/// output step and satisfy `step · f_max < 0.1`.
pub fn evolve_with_step(
    rho0: &DensityMatrix3,
    params: &LambdaParams,
    schedule: &DriveSchedule,
    grid: &TimeGrid,
    step: f64,
) -> Result<Trajectory> {
    if !(step > 0.0) {
        return Err(Error::Grid(format!("internal step {step} must be positive")));
    }
    let f_max = fastest_rate(params, schedule, grid)?;
    let product = step * f_max;
    if product >= MAX_STEP_RATE_PRODUCT {
        return Err(Error::StepSize { step, product });
    }
    let substeps = (grid.step / step).round().max(1.0) as usize;
    if ((grid.step / substeps as f64) - step).abs() > 1e-9 * step {
        return Err(Error::Grid(format!(
            "internal step {step} does not divide the output step {}",
            grid.step
        )));
    }
    integrate(rho0, params, schedule, grid, substeps)
}

fn integrate(
    rho0: &DensityMatrix3,
    params: &LambdaParams,
    schedule: &DriveSchedule,
    grid: &TimeGrid,
    substeps: usize,
) -> Result<Trajectory> {
    params.validate()?;
    let generator = AffineGenerator::new(params, schedule.delta_p, schedule.delta_c);
    let h = grid.step / substeps as f64;
    let ch = C64::new(h, 0.0);
    let (half, sixth, two) = (C64::new(0.5, 0.0), C64::new(1.0 / 6.0, 0.0), C64::new(2.0, 0.0));

    let mut v = rho0.to_vec();
    let mut times = Vec::with_capacity(grid.len);
    let mut states = Vec::with_capacity(grid.len);
    let mut max_drift = (rho0.trace() - C64::new(1.0, 0.0)).norm();
    times.push(grid.start);
    states.push(DensityMatrix3::normalized(rho0.matrix()));

    for k in 1..grid.len {
        let t_out = grid.time(k - 1);
        for s in 0..substeps {
            let t = t_out + h * s as f64;
            let (p0, c0) = schedule.sample(t)?;
            let (pm, cm) = schedule.sample(t + 0.5 * h)?;
            let (p1, c1) = schedule.sample(t + h)?;
            let k1 = generator.apply(p0, c0, &v);
            let k2 = generator.apply(pm, cm, &(v + k1 * (ch * half)));
            let k3 = generator.apply(pm, cm, &(v + k2 * (ch * half)));
            let k4 = generator.apply(p1, c1, &(v + k3 * ch));
            v += (k1 + k2 * two + k3 * two + k4) * (ch * sixth);
            let m = DensityMatrix3::hermitian_part(DensityMatrix3::from_vec(&v).matrix());
            v = Vec9::from_column_slice(m.as_slice());
        }
        let rho = DensityMatrix3::from_vec(&v);
        max_drift = max_drift.max((rho.trace() - C64::new(1.0, 0.0)).norm());
        times.push(grid.time(k));
        states.push(DensityMatrix3::normalized(rho.matrix()));
    }
    Ok(Trajectory {
        times,
        states,
        step: h,
        max_trace_drift: max_drift,
    })
}
