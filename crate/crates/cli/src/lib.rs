//! Command-line driver: config loading, subcommand dispatch and the figure
//! recipes.

pub mod figures;
pub mod output;
pub mod recipes;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use fluxeit_core::config::{config_hash, parse_config, ResultManifest, RunConfig};
use fluxeit_core::Error;

use crate::output::Sink;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FLUXEIT_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("no result: {0}")]
    NoResult(String),
}

impl CliError {
    pub fn io(e: impl std::fmt::Display) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::NoResult(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e.root() {
            Error::Config(_) | Error::InvalidParameter { .. } => CliError::Config(msg),
            Error::NoCrossing { .. } | Error::DegenerateSteadyState { .. } => CliError::NoResult(msg),
            _ => CliError::Numerical(msg),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fluxeit", version, about = "Fluxonium Λ-system EIT simulations")]
pub struct Cli {
    /// TOML run configuration; omitted keys take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for grid sweeps.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Root seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fluxonium transitions and charge elements at the configured flux.
    Spectrum,
    /// Transitions over the configured flux range.
    FluxSweep,
    /// |t| and arg t over control power and probe detuning.
    TransmissionMap,
    /// Group delay versus probe detuning.
    Delay,
    /// EIT/ATS threshold control amplitude.
    Threshold,
    /// Slow-light pulse against its far-detuned reference.
    Pulse,
    /// Storage and retrieval by switching the control off.
    Store {
        /// Also sweep the storage time.
        #[arg(long)]
        sweep: bool,
    },
    /// AIC weights of EIT and ATS fits versus control amplitude.
    Aic(AicArgs),
    /// All figure data sets.
    Figures,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::FluxSweep => "flux-sweep",
            Command::TransmissionMap => "transmission-map",
            Command::Delay => "delay",
            Command::Threshold => "threshold",
            Command::Pulse => "pulse",
            Command::Store { .. } => "store",
            Command::Aic(_) => "aic",
            Command::Figures => "figures",
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct AicArgs {
    #[arg(long)]
    pub oc_min: Option<f64>,
    #[arg(long)]
    pub oc_max: Option<f64>,
    #[arg(long)]
    pub oc_steps: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub replicas: Option<usize>,
}

/// Loads the config and applies command-line overrides.
pub fn load_config(cli: &Cli) -> Result<(RunConfig, String), CliError> {
    let (mut config, hash) = match &cli.config {
        Some(path) => {
            let loaded = parse_config(path).map_err(|e| CliError::Config(e.to_string()))?;
            (loaded.config, loaded.hash)
        }
        None => (RunConfig::default(), config_hash(b"")),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.clone();
    }
    if let Command::Aic(a) = &cli.command {
        let s = &mut config.aic;
        s.oc_min_mhz = a.oc_min.unwrap_or(s.oc_min_mhz);
        s.oc_max_mhz = a.oc_max.unwrap_or(s.oc_max_mhz);
        s.oc_steps = a.oc_steps.unwrap_or(s.oc_steps);
        s.noise = a.noise.unwrap_or(s.noise);
        s.replicas = a.replicas.unwrap_or(s.replicas);
    }
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok((config, hash))
}

/// Runs one subcommand; summary lines go to `log`.
pub fn dispatch(
    command: &Command,
    config: &RunConfig,
    hash: &str,
    log: &mut dyn std::io::Write,
) -> Result<ResultManifest, CliError> {
    let started = Instant::now();
    let mut sink = Sink::new(&config.output.dir, config.output.format)?;
    match command {
        Command::Spectrum => recipes::spectrum(config, &mut sink, log)?,
        Command::FluxSweep => recipes::flux_sweep(config, &mut sink, log)?,
        Command::TransmissionMap => recipes::transmission_map(config, &mut sink, log)?,
        Command::Delay => recipes::delay(config, &mut sink, log)?,
        Command::Threshold => recipes::threshold(config, &mut sink, log)?,
        Command::Pulse => recipes::pulse(config, &mut sink, log)?,
        Command::Store { sweep } => recipes::store(config, *sweep, &mut sink, log)?,
        Command::Aic(_) => recipes::aic(config, &mut sink, log)?,
        Command::Figures => figures::all(config, &mut sink, log)?,
    }
    let manifest = ResultManifest {
        subcommand: command.name().to_string(),
        config_hash: hash.to_string(),
        artifacts: sink.written.clone(),
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(CliError::io)?;
    std::fs::write(config.output.dir.join("manifest.json"), json + "\n").map_err(CliError::io)?;
    Ok(manifest)
}

/// Runs a parsed command line.
pub fn run(cli: &Cli, log: &mut dyn std::io::Write) -> Result<ResultManifest, CliError> {
    let (config, hash) = load_config(cli)?;
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        // Only the first initialization wins; later calls in the same
        // process keep the existing pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    dispatch(&cli.command, &config, &hash, log)
}
