//! Run configuration: a strict TOML file whose omitted keys fall back to
//! the canonical device and drive settings.
//!
//! ```toml
//! seed = 1729
//!
//! [lambda]
//! g02_mhz = 13.78
//!
//! [drive]
//! omega_c_mhz = 2.6
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fluxonium::FluxoniumParams;
use crate::lindblad::{DriveParams, LambdaParams};
use crate::pulse::{PulseSpec, StorageSchedule, DEFAULT_RAMP_US};
use crate::scattering::{linspace, PowerCalibration, DEFAULT_CAL_OMEGA_C_MHZ, DEFAULT_CAL_POWER_DBM, WEAK_PROBE_MHZ};
use crate::selection::SweepSettings;

pub const DEFAULT_SEED: u64 = 1729;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("at `{key}`: {message}")]
    Parse { key: String, message: String },
    #[error("`{key}` {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluxoniumSection {
    pub e_j_ghz: f64,
    pub e_c_ghz: f64,
    pub e_l_ghz: f64,
    pub flux: f64,
    pub basis_size: usize,
}

impl Default for FluxoniumSection {
    fn default() -> Self {
        let p = FluxoniumParams::fitted_device();
        Self {
            e_j_ghz: p.e_j,
            e_c_ghz: p.e_c,
            e_l_ghz: p.e_l,
            flux: p.flux,
            basis_size: p.basis_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluxSweepSection {
    pub flux_min: f64,
    pub flux_max: f64,
    pub points: usize,
}

impl Default for FluxSweepSection {
    fn default() -> Self {
        Self {
            flux_min: 0.4,
            flux_max: 0.6,
            points: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaSection {
    pub nu02_ghz: f64,
    pub nu12_ghz: f64,
    pub nu01_mhz: f64,
    pub g02_mhz: f64,
    pub g12_mhz: f64,
    pub g01_mhz: f64,
    pub g10_mhz: f64,
    pub gphi11_mhz: f64,
    pub gphi22_mhz: f64,
    pub mismatch_rad: f64,
}

impl Default for LambdaSection {
    fn default() -> Self {
        let p = LambdaParams::canonical();
        Self {
            nu02_ghz: p.nu02,
            nu12_ghz: p.nu12,
            nu01_mhz: p.nu01 * 1e3,
            g02_mhz: p.gamma_r_02,
            g12_mhz: p.gamma_r_12,
            g01_mhz: p.gamma_r_01,
            g10_mhz: p.gamma_r_10,
            gphi11_mhz: p.gamma_phi_11,
            gphi22_mhz: p.gamma_phi_22,
            mismatch_rad: p.mismatch_phase,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    pub delta_c_mhz: f64,
    pub omega_c_mhz: f64,
    pub omega_p_mhz: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        Self {
            delta_c_mhz: 0.0,
            omega_c_mhz: DEFAULT_CAL_OMEGA_C_MHZ,
            omega_p_mhz: WEAK_PROBE_MHZ,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectroscopySection {
    /// Transmission-map detuning axis.
    pub delta_min_mhz: f64,
    pub delta_max_mhz: f64,
    pub delta_points: usize,
    /// Finer axis for group delay.
    pub delay_min_mhz: f64,
    pub delay_max_mhz: f64,
    pub delay_points: usize,
    pub pc_min_dbm: f64,
    pub pc_max_dbm: f64,
    pub pc_points: usize,
    /// The calibration passes through `(cal_power_dbm, cal_omega_c_mhz)`.
    pub cal_power_dbm: f64,
    pub cal_omega_c_mhz: f64,
    /// Control amplitudes of the line cuts and delay curves, MHz.
    pub linecut_omega_c_mhz: Vec<f64>,
}

impl Default for SpectroscopySection {
    fn default() -> Self {
        Self {
            delta_min_mhz: -10.0,
            delta_max_mhz: 10.0,
            delta_points: 801,
            delay_min_mhz: -3.0,
            delay_max_mhz: 3.0,
            delay_points: 1201,
            pc_min_dbm: -180.0,
            pc_max_dbm: -130.0,
            pc_points: 51,
            cal_power_dbm: DEFAULT_CAL_POWER_DBM,
            cal_omega_c_mhz: DEFAULT_CAL_OMEGA_C_MHZ,
            linecut_omega_c_mhz: vec![0.0, 1.5, 2.6, 5.7, 8.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSection {
    pub sigma_us: f64,
    pub amp_mhz: f64,
    pub center_us: f64,
    /// Carrier detuning; omitted means the transparency-window center.
    pub detuning_mhz: Option<f64>,
    pub step_us: f64,
    /// Grid half-width in units of σ.
    pub span_sigma: f64,
    /// Control amplitudes of the delay-versus-control sweep, MHz.
    pub oc_sweep_mhz: Vec<f64>,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self {
            sigma_us: 1.0,
            amp_mhz: 0.01,
            center_us: 5.0,
            detuning_mhz: None,
            step_us: 0.01,
            span_sigma: 5.0,
            oc_sweep_mhz: vec![1.5, 2.0, 2.6, 4.0, 5.7, 8.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StorageSection {
    pub oc_high_mhz: f64,
    /// Omitted means one probe width after the pulse center.
    pub t_off_us: Option<f64>,
    pub tau_s_us: f64,
    pub ramp_us: f64,
    pub sigma_us: f64,
    pub amp_mhz: f64,
    pub center_us: f64,
    pub step_us: f64,
    pub tau_s_sweep_us: Vec<f64>,
}

impl Default for StorageSection {
    fn default() -> Self {
        Self {
            oc_high_mhz: 5.7,
            t_off_us: None,
            tau_s_us: 0.5,
            ramp_us: DEFAULT_RAMP_US,
            sigma_us: 0.05,
            amp_mhz: 0.54,
            center_us: 0.5,
            step_us: 0.002,
            tau_s_sweep_us: vec![0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AicSection {
    pub oc_min_mhz: f64,
    pub oc_max_mhz: f64,
    pub oc_steps: usize,
    pub noise: f64,
    pub replicas: usize,
    pub omega_min_mhz: f64,
    pub omega_max_mhz: f64,
    pub omega_points: usize,
    pub rotate_mismatch: bool,
    /// Multistart cap per fit; 0 uses every start.
    pub starts: usize,
}

impl Default for AicSection {
    fn default() -> Self {
        Self {
            oc_min_mhz: 0.5,
            oc_max_mhz: 25.0,
            oc_steps: 50,
            noise: 0.01,
            replicas: 16,
            omega_min_mhz: -30.0,
            omega_max_mhz: 30.0,
            omega_points: 201,
            rotate_mismatch: false,
            starts: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub fluxonium: FluxoniumSection,
    pub flux_sweep: FluxSweepSection,
    pub lambda: LambdaSection,
    pub drive: DriveSection,
    pub spectroscopy: SpectroscopySection,
    pub pulse: PulseSection,
    pub storage: StorageSection,
    pub aic: AicSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            fluxonium: FluxoniumSection::default(),
            flux_sweep: FluxSweepSection::default(),
            lambda: LambdaSection::default(),
            drive: DriveSection::default(),
            spectroscopy: SpectroscopySection::default(),
            pulse: PulseSection::default(),
            storage: StorageSection::default(),
            aic: AicSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Parsed configuration together with the hash of its source bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub hash: String,
}

/// Hex SHA-256 of the raw config bytes.
pub fn config_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

pub fn parse_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let bytes = std::fs::read(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| ConfigError::Parse {
        key: String::new(),
        message: e.to_string(),
    })?;
    let config = parse_str(&text)?;
    Ok(LoadedConfig {
        config,
        hash: config_hash(&bytes),
    })
}

/// Parses and validates TOML text.
pub fn parse_str(text: &str) -> Result<RunConfig, ConfigError> {
    let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::Parse {
        key: String::new(),
        message: e.to_string(),
    })?;
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
        key: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

fn require(cond: bool, key: &str, reason: &str) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(invalid(key, reason))
    }
}

fn positive(v: f64, key: &str) -> Result<(), ConfigError> {
    require(v > 0.0 && v.is_finite(), key, "must be positive")
}

fn non_negative(v: f64, key: &str) -> Result<(), ConfigError> {
    require(v >= 0.0 && v.is_finite(), key, "must be non-negative")
}

fn finite(v: f64, key: &str) -> Result<(), ConfigError> {
    require(v.is_finite(), key, "must be finite")
}

fn range(lo: f64, hi: f64, n: usize, section: &str, lo_key: &str, n_key: &str) -> Result<(), ConfigError> {
    finite(lo, &format!("{section}.{lo_key}"))?;
    finite(hi, &format!("{section}.{lo_key}"))?;
    require(hi > lo, &format!("{section}.{lo_key}"), "must be below the upper bound")?;
    require(n >= 2, &format!("{section}.{n_key}"), "must be at least 2")
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let f = &self.fluxonium;
        non_negative(f.e_j_ghz, "fluxonium.e_j_ghz")?;
        positive(f.e_c_ghz, "fluxonium.e_c_ghz")?;
        positive(f.e_l_ghz, "fluxonium.e_l_ghz")?;
        finite(f.flux, "fluxonium.flux")?;
        require(f.basis_size >= 10, "fluxonium.basis_size", "must be at least 10")?;
        let s = &self.flux_sweep;
        range(s.flux_min, s.flux_max, s.points, "flux_sweep", "flux_min", "points")?;

        let l = &self.lambda;
        positive(l.nu02_ghz, "lambda.nu02_ghz")?;
        positive(l.nu12_ghz, "lambda.nu12_ghz")?;
        positive(l.nu01_mhz, "lambda.nu01_mhz")?;
        for (v, key) in [
            (l.g02_mhz, "lambda.g02_mhz"),
            (l.g12_mhz, "lambda.g12_mhz"),
            (l.g01_mhz, "lambda.g01_mhz"),
            (l.g10_mhz, "lambda.g10_mhz"),
            (l.gphi11_mhz, "lambda.gphi11_mhz"),
            (l.gphi22_mhz, "lambda.gphi22_mhz"),
        ] {
            non_negative(v, key)?;
        }
        finite(l.mismatch_rad, "lambda.mismatch_rad")?;
        require(
            (l.nu02_ghz - l.nu12_ghz - l.nu01_mhz / 1e3).abs() <= 1e-6,
            "lambda.nu02_ghz",
            "must equal nu12_ghz + nu01_mhz/1000",
        )?;

        let d = &self.drive;
        finite(d.delta_c_mhz, "drive.delta_c_mhz")?;
        non_negative(d.omega_c_mhz, "drive.omega_c_mhz")?;
        positive(d.omega_p_mhz, "drive.omega_p_mhz")?;

        let sp = &self.spectroscopy;
        range(sp.delta_min_mhz, sp.delta_max_mhz, sp.delta_points, "spectroscopy", "delta_min_mhz", "delta_points")?;
        range(sp.delay_min_mhz, sp.delay_max_mhz, sp.delay_points, "spectroscopy", "delay_min_mhz", "delay_points")?;
        require(sp.delay_points >= 3, "spectroscopy.delay_points", "must be at least 3")?;
        range(sp.pc_min_dbm, sp.pc_max_dbm, sp.pc_points, "spectroscopy", "pc_min_dbm", "pc_points")?;
        finite(sp.cal_power_dbm, "spectroscopy.cal_power_dbm")?;
        positive(sp.cal_omega_c_mhz, "spectroscopy.cal_omega_c_mhz")?;
        for v in &sp.linecut_omega_c_mhz {
            non_negative(*v, "spectroscopy.linecut_omega_c_mhz")?;
        }

        let p = &self.pulse;
        positive(p.sigma_us, "pulse.sigma_us")?;
        non_negative(p.amp_mhz, "pulse.amp_mhz")?;
        finite(p.center_us, "pulse.center_us")?;
        if let Some(v) = p.detuning_mhz {
            finite(v, "pulse.detuning_mhz")?;
        }
        positive(p.step_us, "pulse.step_us")?;
        require(p.span_sigma >= 4.0 && p.span_sigma.is_finite(), "pulse.span_sigma", "must be at least 4")?;
        for v in &p.oc_sweep_mhz {
            non_negative(*v, "pulse.oc_sweep_mhz")?;
        }

        let st = &self.storage;
        non_negative(st.oc_high_mhz, "storage.oc_high_mhz")?;
        if let Some(v) = st.t_off_us {
            finite(v, "storage.t_off_us")?;
        }
        non_negative(st.tau_s_us, "storage.tau_s_us")?;
        positive(st.ramp_us, "storage.ramp_us")?;
        positive(st.sigma_us, "storage.sigma_us")?;
        non_negative(st.amp_mhz, "storage.amp_mhz")?;
        finite(st.center_us, "storage.center_us")?;
        positive(st.step_us, "storage.step_us")?;
        for v in &st.tau_s_sweep_us {
            non_negative(*v, "storage.tau_s_sweep_us")?;
        }

        let a = &self.aic;
        range(a.oc_min_mhz, a.oc_max_mhz, a.oc_steps, "aic", "oc_min_mhz", "oc_steps")?;
        non_negative(a.noise, "aic.noise")?;
        require(a.replicas >= 1, "aic.replicas", "must be at least 1")?;
        range(a.omega_min_mhz, a.omega_max_mhz, a.omega_points, "aic", "omega_min_mhz", "omega_points")?;
        require(a.omega_points >= crate::selection::MIN_POINTS, "aic.omega_points", "must be at least 8")?;
        Ok(())
    }

    pub fn fluxonium_params(&self) -> FluxoniumParams {
        let f = &self.fluxonium;
        FluxoniumParams {
            e_j: f.e_j_ghz,
            e_c: f.e_c_ghz,
            e_l: f.e_l_ghz,
            flux: f.flux,
            basis_size: f.basis_size,
        }
    }

    pub fn flux_grid(&self) -> Vec<f64> {
        let s = &self.flux_sweep;
        linspace(s.flux_min, s.flux_max, s.points)
    }

    pub fn lambda_params(&self) -> LambdaParams {
        let l = &self.lambda;
        LambdaParams {
            nu02: l.nu02_ghz,
            nu12: l.nu12_ghz,
            nu01: l.nu01_mhz / 1e3,
            gamma_r_02: l.g02_mhz,
            gamma_r_12: l.g12_mhz,
            gamma_r_01: l.g01_mhz,
            gamma_r_10: l.g10_mhz,
            gamma_phi_11: l.gphi11_mhz,
            gamma_phi_22: l.gphi22_mhz,
            mismatch_phase: l.mismatch_rad,
        }
    }

    /// Drive with `Δ_p = 0`; spectra set their own probe detuning.
    pub fn drive_params(&self) -> DriveParams {
        let d = &self.drive;
        DriveParams {
            delta_p: 0.0,
            delta_c: d.delta_c_mhz,
            omega_p: d.omega_p_mhz,
            omega_c: d.omega_c_mhz,
        }
    }

    pub fn calibration(&self) -> PowerCalibration {
        PowerCalibration::through(self.spectroscopy.cal_power_dbm, self.spectroscopy.cal_omega_c_mhz)
    }

    pub fn delta_grid(&self) -> Vec<f64> {
        let s = &self.spectroscopy;
        linspace(s.delta_min_mhz, s.delta_max_mhz, s.delta_points)
    }

    pub fn delay_grid(&self) -> Vec<f64> {
        let s = &self.spectroscopy;
        linspace(s.delay_min_mhz, s.delay_max_mhz, s.delay_points)
    }

    pub fn pc_grid(&self) -> Vec<f64> {
        let s = &self.spectroscopy;
        linspace(s.pc_min_dbm, s.pc_max_dbm, s.pc_points)
    }

    /// Slow-light probe; `detuning` fills in when the config leaves it open.
    pub fn pulse_spec(&self, detuning: f64) -> PulseSpec {
        let p = &self.pulse;
        PulseSpec {
            sigma: p.sigma_us,
            amplitude: p.amp_mhz,
            center: p.center_us,
            carrier_detuning: p.detuning_mhz.unwrap_or(detuning),
        }
    }

    pub fn storage_probe(&self) -> PulseSpec {
        let s = &self.storage;
        PulseSpec {
            sigma: s.sigma_us,
            amplitude: s.amp_mhz,
            center: s.center_us,
            carrier_detuning: 0.0,
        }
    }

    pub fn storage_schedule(&self) -> StorageSchedule {
        let s = &self.storage;
        StorageSchedule {
            omega_c_high: s.oc_high_mhz,
            t_off: s.t_off_us.unwrap_or(s.center_us + s.sigma_us),
            tau_s: s.tau_s_us,
            ramp: s.ramp_us,
        }
    }

    pub fn oc_grid(&self) -> Vec<f64> {
        let a = &self.aic;
        linspace(a.oc_min_mhz, a.oc_max_mhz, a.oc_steps)
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        let a = &self.aic;
        SweepSettings {
            omega_grid: linspace(a.omega_min_mhz, a.omega_max_mhz, a.omega_points),
            noise_sigma: a.noise,
            seed: self.seed,
            replicas: a.replicas,
            rotate_out_mismatch: a.rotate_mismatch,
            starts: a.starts,
        }
    }
}

/// Record of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultManifest {
    pub subcommand: String,
    pub config_hash: String,
    pub artifacts: Vec<PathBuf>,
    pub wall_seconds: f64,
}
