//! EIT versus Autler–Townes line-shape fits and AIC-based model selection.
//!
//! Models, on the probe-detuning axis `ω` (MHz):
//!
//! * EIT: `1 − C1/(ω² + Γ1²) + C2/(ω² + Γ2²)`
//! * ATS: `1 − C/((ω − δ)² + Γ²) − C/((ω + δ)² + Γ²)`
//!
//! Widths are fitted through their square roots so they stay positive.
//! `C2` is free in sign, so the EIT labels are fixed by `Γ1 ≥ Γ2`.

mod lm;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{DriveParams, LambdaParams};
use crate::scattering::{eit_spectrum, remove_mismatch, WEAK_PROBE_MHZ};

/// Fewest points accepted for a line shape.
pub const MIN_POINTS: usize = 8;

const WIDTH_STARTS: [f64; 4] = [0.1, 1.0, 5.0, 20.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Eit,
    Ats,
}

impl ModelKind {
    pub fn parameter_count(self) -> usize {
        match self {
            ModelKind::Eit => 4,
            ModelKind::Ats => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Eit => "EIT",
            ModelKind::Ats => "ATS",
        }
    }

    /// Model value at `omega` for physical parameters.
    pub fn eval(self, params: &[f64], omega: f64) -> f64 {
        let w2 = omega * omega;
        match self {
            ModelKind::Eit => {
                let (c1, g1, c2, g2) = (params[0], params[1], params[2], params[3]);
                1.0 - c1 / (w2 + g1 * g1) + c2 / (w2 + g2 * g2)
            }
            ModelKind::Ats => {
                let (c, d, g) = (params[0], params[1], params[2]);
                1.0 - c / ((omega - d).powi(2) + g * g) - c / ((omega + d).powi(2) + g * g)
            }
        }
    }

    /// Residuals and Jacobian in the fitted coordinates, where every width
    /// enters as the square of a free variable.
    fn residuals(self, theta: &DVector<f64>, data: &LineShapeData) -> (DVector<f64>, DMatrix<f64>) {
        let n = data.len();
        let k = self.parameter_count();
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, k);
        for (i, (&w, &y)) in data.omega.iter().zip(&data.values).enumerate() {
            match self {
                ModelKind::Eit => {
                    let (c1, a, c2, b) = (theta[0], theta[1], theta[2], theta[3]);
                    let d1 = w * w + a.powi(4);
                    let d2 = w * w + b.powi(4);
                    r[i] = 1.0 - c1 / d1 + c2 / d2 - y;
                    j[(i, 0)] = -1.0 / d1;
                    j[(i, 1)] = c1 / (d1 * d1) * 4.0 * a.powi(3);
                    j[(i, 2)] = 1.0 / d2;
                    j[(i, 3)] = -c2 / (d2 * d2) * 4.0 * b.powi(3);
                }
                ModelKind::Ats => {
                    let (c, d, a) = (theta[0], theta[1], theta[2]);
                    let g2 = a.powi(4);
                    let dm = (w - d).powi(2) + g2;
                    let dp = (w + d).powi(2) + g2;
                    r[i] = 1.0 - c / dm - c / dp - y;
                    j[(i, 0)] = -1.0 / dm - 1.0 / dp;
                    j[(i, 1)] = c / (dm * dm) * (-2.0 * (w - d)) + c / (dp * dp) * (2.0 * (w + d));
                    j[(i, 2)] = (c / (dm * dm) + c / (dp * dp)) * 4.0 * a.powi(3);
                }
            }
        }
        (r, j)
    }

    fn to_physical(self, theta: &DVector<f64>) -> Vec<f64> {
        match self {
            ModelKind::Eit => {
                let (c1, g1, c2, g2) = (theta[0], theta[1].powi(2), theta[2], theta[3].powi(2));
                // (C1, Γ1, C2, Γ2) and (−C2, Γ2, −C1, Γ1) are the same curve;
                // report the broad Lorentzian first.
                if g1 >= g2 {
                    vec![c1, g1, c2, g2]
                } else {
                    vec![-c2, g2, -c1, g1]
                }
            }
            ModelKind::Ats => vec![theta[0], theta[1].abs(), theta[2].powi(2)],
        }
    }

    /// Deterministic list of starting points in fitted coordinates.
    fn starts(self, data: &LineShapeData) -> Vec<DVector<f64>> {
        let depth = (1.0 - data.min_value()).max(1e-3);
        let mut out = Vec::new();
        match self {
            ModelKind::Eit => {
                out.push(DVector::from_vec(vec![0.0, 1.0, 0.0, 1.0]));
                for g1 in WIDTH_STARTS {
                    for g2 in WIDTH_STARTS {
                        for sign in [1.0, -1.0] {
                            out.push(DVector::from_vec(vec![
                                depth * g1 * g1,
                                g1.sqrt(),
                                sign * 0.5 * depth * g2 * g2,
                                g2.sqrt(),
                            ]));
                        }
                    }
                }
            }
            ModelKind::Ats => {
                out.push(DVector::from_vec(vec![0.0, 0.0, 1.0]));
                let dip = data.dip_offset();
                for g in WIDTH_STARTS {
                    for d in [0.0, 0.5 * dip, dip, 2.0 * dip] {
                        out.push(DVector::from_vec(vec![0.5 * depth * g * g, d, g.sqrt()]));
                    }
                }
            }
        }
        out
    }
}

/// Real transmission samples on an ascending detuning grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineShapeData {
    /// MHz
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
}

impl LineShapeData {
    pub fn new(omega: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omega.len() != values.len() {
            return Err(Error::Data(format!(
                "{} detunings but {} values",
                omega.len(),
                values.len()
            )));
        }
        if omega.len() < MIN_POINTS {
            return Err(Error::Data(format!("need at least {MIN_POINTS} points, got {}", omega.len())));
        }
        if omega.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite sample".into()));
        }
        if omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Data("detuning grid must be strictly ascending".into()));
        }
        Ok(Self { omega, values })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `|ω|` of the deepest sample, or a tenth of the span if that is zero.
    fn dip_offset(&self) -> f64 {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        let d = self.omega[i].abs();
        if d > 0.0 {
            d
        } else {
            0.1 * (self.omega[self.len() - 1] - self.omega[0])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub model: ModelKind,
    /// EIT: `[C1, Γ1, C2, Γ2]`; ATS: `[C, δ, Γ]`.
    pub params: Vec<f64>,
    pub rss: f64,
    pub n: usize,
    pub k: usize,
    /// `n·ln(rss/n) + 2k`; `−∞` for a perfect fit.
    pub aic: f64,
    /// Mean per-point AIC weight against the competing model, once compared.
    pub per_point_weight: Option<f64>,
    pub converged: bool,
    /// The solution lies on a flat family (e.g. all amplitudes zero).
    pub degenerate: bool,
    pub perfect_fit: bool,
}

impl FitOutcome {
    pub fn predict(&self, omega: f64) -> f64 {
        self.model.eval(&self.params, omega)
    }

    /// Sign of the narrow EIT term; `None` for ATS.
    pub fn c2_sign(&self) -> Option<f64> {
        (self.model == ModelKind::Eit).then(|| self.params[2].signum())
    }
}

/// Residual sum of squares of `model` with physical `params` on `data`.
pub fn rss_of(model: ModelKind, params: &[f64], data: &LineShapeData) -> f64 {
    data.omega
        .iter()
        .zip(&data.values)
        .map(|(&w, &y)| (model.eval(params, w) - y).powi(2))
        .sum()
}

/// Best of at most `starts` multistart fits (all when `starts == 0`).
pub fn fit_model(model: ModelKind, data: &LineShapeData, starts: usize) -> Result<FitOutcome> {
    let mut list = model.starts(data);
    if starts > 0 {
        list.truncate(starts);
    }
    let mut best: Option<lm::LmOutcome> = None;
    let mut any_converged = false;
    for x0 in list {
        let out = lm::minimize(|theta| model.residuals(theta, data), x0);
        if !out.rss.is_finite() {
            continue;
        }
        any_converged |= out.converged;
        if best.as_ref().is_none_or(|b| out.rss < b.rss) {
            best = Some(out);
        }
    }
    let best = best.ok_or_else(|| Error::Data(format!("no finite {} fit", model.name())))?;
    let n = data.len();
    let k = model.parameter_count();
    let aic = aic_score(best.rss, n, k)?;
    Ok(FitOutcome {
        model,
        params: model.to_physical(&best.x),
        rss: best.rss,
        n,
        k,
        aic,
        per_point_weight: None,
        converged: any_converged,
        degenerate: is_degenerate(&best.normal),
        perfect_fit: best.rss == 0.0,
    })
}

fn is_degenerate(normal: &DMatrix<f64>) -> bool {
    let eig = normal.clone().symmetric_eigenvalues();
    let max = eig.amax();
    max == 0.0 || eig.min() <= 1e-12 * max
}

pub fn fit_eit_model(data: &LineShapeData, starts: usize) -> Result<FitOutcome> {
    fit_model(ModelKind::Eit, data, starts)
}

pub fn fit_ats_model(data: &LineShapeData, starts: usize) -> Result<FitOutcome> {
    fit_model(ModelKind::Ats, data, starts)
}

/// `I = n·ln(rss/n) + 2k`. A perfect fit scores `−∞`.
pub fn aic_score(rss: f64, n: usize, k: usize) -> Result<f64> {
    if n <= k {
        return Err(Error::Data(format!("{n} points cannot score a {k}-parameter model")));
    }
    if !(rss >= 0.0) || !rss.is_finite() {
        return Err(Error::Data(format!("invalid residual sum {rss}")));
    }
    if rss == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let n = n as f64;
    Ok(n * (rss / n).ln() + 2.0 * k as f64)
}

/// Mean per-point weights `(w̄_EIT, w̄_ATS)` from `Ī = I/n`.
pub fn aic_weights(i_eit: f64, i_ats: f64, n: usize) -> (f64, f64) {
    let n = n.max(1) as f64;
    let a = -0.5 * i_eit / n;
    let b = -0.5 * i_ats / n;
    let w_eit = match (a.is_infinite(), b.is_infinite()) {
        (true, true) => 0.5,
        (true, false) => 1.0,
        (false, true) => 0.0,
        _ => {
            let m = a.max(b);
            let (ea, eb) = ((a - m).exp(), (b - m).exp());
            ea / (ea + eb)
        }
    };
    (w_eit, 1.0 - w_eit)
}

/// Fits both models and fills in their per-point weights.
pub fn compare_models(data: &LineShapeData, starts: usize) -> Result<(FitOutcome, FitOutcome)> {
    let mut eit = fit_eit_model(data, starts)?;
    let mut ats = fit_ats_model(data, starts)?;
    let (we, wa) = aic_weights(eit.aic, ats.aic, data.len());
    eit.per_point_weight = Some(we);
    ats.per_point_weight = Some(wa);
    Ok((eit, ats))
}

/// Noise-free `Re(t)` on `grid` at control amplitude `omega_c`, optionally
/// with the mismatch rotation removed first.
pub fn clean_line_shape(
    params: &LambdaParams,
    omega_c: f64,
    grid: &[f64],
    rotate_out_mismatch: bool,
) -> Result<Vec<f64>> {
    let drive = DriveParams::new(0.0, 0.0, WEAK_PROBE_MHZ, omega_c)?;
    let spectrum = eit_spectrum(params, &drive, grid)?;
    Ok(spectrum
        .iter()
        .map(|p| {
            if rotate_out_mismatch {
                remove_mismatch(p.t, params).re
            } else {
                p.t.re
            }
        })
        .collect())
}

/// Adds seeded i.i.d. Gaussian noise to `clean`.
pub fn add_noise(clean: &[f64], noise_sigma: f64, seed: u64) -> Result<Vec<f64>> {
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::invalid("noise_sigma", "must be non-negative"));
    }
    if noise_sigma == 0.0 {
        return Ok(clean.to_vec());
    }
    let normal = Normal::new(0.0, noise_sigma).map_err(|e| Error::invalid("noise_sigma", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(clean.iter().map(|&v| v + rng.sample(normal)).collect())
}

/// Synthetic `Re(t)` data: forward model plus seeded Gaussian noise.
pub fn synth_dataset(
    params: &LambdaParams,
    omega_c: f64,
    grid: &[f64],
    noise_sigma: f64,
    seed: u64,
    rotate_out_mismatch: bool,
) -> Result<LineShapeData> {
    let clean = clean_line_shape(params, omega_c, grid, rotate_out_mismatch)?;
    LineShapeData::new(grid.to_vec(), add_noise(&clean, noise_sigma, seed)?)
}

/// Independent stream seed for task `(a, b)` (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F).rotate_left(31);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Replica-averaged comparison at one control amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightPoint {
    pub omega_c: f64,
    pub rss_eit: f64,
    pub rss_ats: f64,
    pub w_eit: f64,
    pub w_ats: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    /// Control amplitude (MHz) where `w̄_EIT` falls through 0.5.
    pub omega_aic: f64,
    pub curve: Vec<WeightPoint>,
}

/// Settings of an AIC sweep besides the control grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    /// Detuning axis of every synthetic data set, MHz.
    pub omega_grid: Vec<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
    pub replicas: usize,
    pub rotate_out_mismatch: bool,
    /// Multistart cap per fit; 0 means all.
    pub starts: usize,
}

/// Weight curve over `oc_grid`, replica-averaged. Every (point, replica)
/// pair draws from its own derived seed, so results do not depend on
/// scheduling.
pub fn aic_weight_curve(
    params: &LambdaParams,
    oc_grid: &[f64],
    settings: &SweepSettings,
) -> Result<Vec<WeightPoint>> {
    if settings.replicas == 0 {
        return Err(Error::invalid("replicas", "must be at least 1"));
    }
    let tasks: Vec<(usize, usize)> = (0..oc_grid.len())
        .flat_map(|i| (0..settings.replicas).map(move |r| (i, r)))
        .collect();
    let cleans = oc_grid
        .par_iter()
        .map(|&oc| clean_line_shape(params, oc, &settings.omega_grid, settings.rotate_out_mismatch))
        .collect::<Result<Vec<_>>>()?;
    let fits = tasks
        .par_iter()
        .map(|&(i, r)| {
            let seed = derive_seed(settings.seed, i as u64, r as u64);
            let values = add_noise(&cleans[i], settings.noise_sigma, seed)?;
            let data = LineShapeData::new(settings.omega_grid.clone(), values)?;
            compare_models(&data, settings.starts)
        })
        .collect::<Result<Vec<_>>>()?;
    let reps = settings.replicas as f64;
    Ok(oc_grid
        .iter()
        .enumerate()
        .map(|(i, &omega_c)| {
            let chunk = &fits[i * settings.replicas..(i + 1) * settings.replicas];
            let mean = |f: &dyn Fn(&(FitOutcome, FitOutcome)) -> f64| chunk.iter().map(f).sum::<f64>() / reps;
            let w_eit = mean(&|p| p.0.per_point_weight.unwrap_or(0.5));
            WeightPoint {
                omega_c,
                rss_eit: mean(&|p| p.0.rss),
                rss_ats: mean(&|p| p.1.rss),
                w_eit,
                w_ats: 1.0 - w_eit,
            }
        })
        .collect())
}

/// First downward crossing of `w̄_EIT = 0.5`, linearly interpolated.
pub fn find_crossover(curve: &[WeightPoint]) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        (a.w_eit >= 0.5 && b.w_eit < 0.5).then(|| {
            let f = (a.w_eit - 0.5) / (a.w_eit - b.w_eit);
            a.omega_c + f * (b.omega_c - a.omega_c)
        })
    })
}

/// Control amplitude where the AIC preference switches from EIT to ATS.
pub fn aic_crossover(params: &LambdaParams, oc_grid: &[f64], settings: &SweepSettings) -> Result<Crossover> {
    if oc_grid.len() < 2 || oc_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("control grid must be ascending with at least 2 points".into()));
    }
    if oc_grid[0] > 0.5 || oc_grid[oc_grid.len() - 1] < 25.0 {
        return Err(Error::Grid(format!(
            "control grid [{}, {}] must span [0.5, 25] MHz",
            oc_grid[0],
            oc_grid[oc_grid.len() - 1]
        )));
    }
    let curve = aic_weight_curve(params, oc_grid, settings)?;
    match find_crossover(&curve) {
        Some(omega_aic) => Ok(Crossover { omega_aic, curve }),
        None => Err(Error::NoCrossing {
            oc_min: oc_grid[0],
            oc_max: oc_grid[oc_grid.len() - 1],
            curve: curve.iter().map(|p| (p.omega_c, p.w_eit)).collect(),
        }),
    }
}
