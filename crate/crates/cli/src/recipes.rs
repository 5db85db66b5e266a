//! Table builders and the single-purpose subcommands.

use std::io::Write;

use fluxeit_core::config::RunConfig;
use fluxeit_core::fluxonium::{self, FluxPoint};
use fluxeit_core::pulse::{
    extract_delay, extract_peak_delay, fit_decay_constant, gaussian_photon_number, propagate_pulse,
    reference_pulse, run_storage, storage_efficiency, storage_sweep, PulseRecord,
};
use fluxeit_core::scattering::{
    eit_spectrum, eit_threshold, group_delay, power_map, resolves_window, window_center, DelayCurve,
    TransmissionPoint,
};
use fluxeit_core::selection::{aic_weight_curve, find_crossover, WeightPoint};
use fluxeit_core::Error;

use crate::output::{fmt_num, Cell, Sink, Table};
use crate::CliError;

pub const SPECTRUM_HEADER: [&str; 7] = ["flux", "nu01_ghz", "nu12_ghz", "nu02_ghz", "n01", "n12", "n02"];
pub const MAP_HEADER: [&str; 4] = ["pc_dbm", "delta_p_mhz", "abs_t", "arg_t_rad"];
pub const DELAY_HEADER: [&str; 2] = ["delta_p_mhz", "tau_d_ns"];
pub const THRESHOLD_HEADER: [&str; 1] = ["omega_eit_mhz"];
pub const RECORD_HEADER: [&str; 6] = ["t_us", "re_in", "im_in", "re_out", "im_out", "oc_mhz"];
pub const AIC_HEADER: [&str; 5] = ["oc_mhz", "rss_eit", "rss_ats", "w_eit", "w_ats"];
pub const STORAGE_SWEEP_HEADER: [&str; 2] = ["tau_s_us", "efficiency"];

fn say(log: &mut dyn Write, line: impl AsRef<str>) -> Result<(), CliError> {
    writeln!(log, "{}", line.as_ref()).map_err(CliError::io)
}

pub fn spectrum_table(points: &[FluxPoint]) -> Table {
    let mut t = Table::new(&SPECTRUM_HEADER);
    for p in points {
        let s = &p.spectrum;
        t.push(vec![
            p.flux.into(),
            s.nu(0, 1).into(),
            s.nu(1, 2).into(),
            s.nu(0, 2).into(),
            s.charge_element(0, 1).into(),
            s.charge_element(1, 2).into(),
            s.charge_element(0, 2).into(),
        ]);
    }
    t
}

pub fn spectrum(config: &RunConfig, sink: &mut Sink, log: &mut dyn Write) -> Result<(), CliError> {
    let params = config.fluxonium_params();
    let s = fluxonium::spectrum(&params, 3)?;
    let point = FluxPoint {
        flux: params.flux,
        spectrum: s,
    };
    let table = spectrum_table(std::slice::from_ref(&point));
    sink.write("spectrum", &table)?;
    say(log, table.to_csv()?.trim_end())
}

pub fn flux_sweep(config: &RunConfig, sink: &mut Sink, log: &mut dyn Write) -> Result<(), CliError> {
    let points = fluxonium::flux_sweep(&config.fluxonium_params(), &config.flux_grid(), 3)?;
    let path = sink.write("flux_sweep", &spectrum_table(&points))?;
    say(log, format!("wrote {} flux points to {}", points.len(), path.display()))
}

pub fn map_table(config: &RunConfig) -> Result<Table, CliError> {
    let map = power_map(
        &config.lambda_params(),
        &config.drive_params(),
        &config.delta_grid(),
        &config.pc_grid(),
        &config.calibration(),
    )?;
    let mut t = Table::new(&MAP_HEADER);
    for (pc, row) in map.pc_dbm.iter().zip(&map.rows) {
        for (d, tr) in map.delta_p.iter().zip(row) {
            t.push(vec![(*pc).into(), (*d).into(), tr.norm().into(), tr.arg().into()]);
        }
    }
    Ok(t)
}

pub fn transmission_map(config: &RunConfig, sink: &mut Sink, log: &mut dyn Write) -> Result<(), CliError> {
    let path = sink.write("transmission_map", &map_table(config)?)?;
    say(log, format!("wrote {}", path.display()))
}

/// Spectrum on the delay grid at `omega_c` and its group delay.
pub fn delay_curve(config: &RunConfig, omega_c: f64) -> Result<(Vec<TransmissionPoint>, DelayCurve), CliError> {
    let params = config.lambda_params();
    let grid = config.delay_grid();
    let spectrum = eit_spectrum(&params, &config.drive_params().with_omega_c(omega_c), &grid)?;
    let curve = group_delay(&spectrum)?;
    Ok((spectrum, curve))
}

/// Transparency-window center at `omega_c`, or `Δ_c` if there is none.
pub fn window_center_at(config: &RunConfig, omega_c: f64) -> Result<f64, CliError> {
    let (spectrum, _) = delay_curve(config, omega_c)?;
    let dc = config.drive.delta_c_mhz;
    Ok(window_center(&spectrum, dc).unwrap_or(dc))
}

pub fn delay_table(curve: &DelayCurve) -> Table {
    let mut t = Table::new(&DELAY_HEADER);
    for (d, tau) in curve.delta_p.iter().zip(&curve.tau_d) {
        t.push(vec![(*d).into(), (*tau).into()]);
    }
    t
}

pub fn delay(config: &RunConfig, sink: &mut Sink, log: &mut dyn Write) -> Result<(), CliError> {
    let omega_c = config.drive.omega_c_mhz;
    let (spectrum, curve) = delay_curve(config, omega_c)?;
    sink.write("delay", &delay_table(&curve))?;
    let params = config.lambda_params();
    let step = config.delay_grid()[1] - config.delay_grid()[0];
    if !resolves_window(step, &params, omega_c) {
        say(log, "warning: detuning step resolves the transparency window with fewer than 20 points")?;
    }
    if let Some((d, tau)) = curve.max() {
        say(log, format!("max_tau_d_ns = {} at delta_p_mhz = {}", fmt_num(tau), fmt_num(d)))?;
    }
    if let Some(c) = window_center(&spectrum, config.drive.delta_c_mhz) {
        let tau = curve.at(c).unwrap_or(f64::NAN);
        say(log, format!("window_center_mhz = {}", fmt_num(c)))?;
        say(log, format!("tau_d_at_center_ns = {}", fmt_num(tau)))?;
    }
    if let Some((d, tau)) = curve.min() {
        say(log, format!("min_tau_d_ns = {} at delta_p_mhz = {}", fmt_num(tau), fmt_num(d)))?;
    }
    // Diagnostic only: the same scan without any |0⟩–|1⟩ decoherence.
    let ideal = group_delay(&eit_spectrum(
        &params.without_ground_decoherence(),
        &config.drive_params().with_omega_c(omega_c),
        &config.delay_grid(),
    )?)?;
    if let Some((d, tau)) = ideal.max() {
        say(log, format!("ideal_max_tau_d_ns = {} at delta_p_mhz = {}", fmt_num(tau), fmt_num(d)))?;
    }
    Ok(())
}

pub fn threshold(config: &RunConfig, sink: &mut Sink, log: &mut dyn Write) -> Result<(), CliError> {
    let mut t = Table::new(&THRESHOLD_HEADER);
    t.push(vec![eit_threshold(&config.lambda_params()).into()]);
    sink.write("threshold", &t)?;
    say(log, t.to_csv()?.trim_end())
}

pub fn record_table(record: &PulseRecord, trace: Option<&str>) -> Table {
    let header: Vec<&'static str> = match trace {
        Some(_) => std::iter::once("trace").chain(RECORD_HEADER).collect(),
        None => RECORD_HEADER.to_vec(),
    };
    let mut t = Table { header, rows: Vec::new() };
    append_record(&mut t, record, trace);
    t
}

pub fn append_record(t: &mut Table, record: &PulseRecord, trace: Option<&str>) {
    for i in 0..record.len() {
        let mut row: Vec<Cell> = Vec::with_capacity(7);
        if let Some(name) = trace {
            row.push(name.into());
        }
        row.extend([
            record.times[i].into(),
            record.input[i].re.into(),
            record.input[i].im.into(),
            record.output[i].re.into(),
            record.output[i].im.into(),
            record.control[i].into(),
        ]);
        t.push(row);
    }
}

/// Slow-light pulse and its reference; also the carrier detuning used.
pub fn slow_light_records(config: &RunConfig) -> Result<(PulseRecord, PulseRecord, f64), CliError> {
    let omega_c = config.drive.omega_c_mhz;
    let detuning = match config.pulse.detuning_mhz {
        Some(d) => d,
        None => window_center_at(config, omega_c)?,
    };
    let probe = config.pulse_spec(detuning);
    let grid = probe.grid(config.pulse.span_sigma, config.pulse.step_us)?;
    let params = config.lambda_params();
    let reference = reference_pulse(&params, &probe, &grid)?;
    let test = propagate_pulse(&params, &probe, move |_| omega_c, config.drive.delta_c_mhz, &grid)?;
    Ok((reference, test, detuning))
}

pub fn pulse(config: &RunConfig, sink: &mut Sink, log: &mut dyn Write) -> Result<(), CliError> {
    let (reference, test, detuning) = slow_light_records(config)?;
    sink.write("pulse", &record_table(&test, None))?;
    sink.write("pulse_reference", &record_table(&reference, None))?;
    let (_, curve) = delay_curve(config, config.drive.omega_c_mhz)?;
    say(log, format!("detuning_mhz = {}", fmt_num(detuning)))?;
    say(log, format!("centroid_delay_ns = {}", fmt_num(extract_delay(&reference, &test)?)))?;
    say(log, format!("peak_delay_ns = {}", fmt_num(extract_peak_delay(&reference, &test)?)))?;
    say(
        log,
        format!(
            "spectral_tau_d_ns = {}",
            fmt_num(curve.at(detuning).unwrap_or(f64::NAN))
        ),
    )
}

/// Storage run and reference on a common grid, plus η and the window.
pub fn storage_records(config: &RunConfig) -> Result<(PulseRecord, PulseRecord, (f64, f64), f64), CliError> {
    let params = config.lambda_params();
    let probe = config.storage_probe();
    let schedule = config.storage_schedule();
    let grid = schedule.grid(&probe, config.storage.step_us)?;
    let reference = reference_pulse(&params, &probe, &grid)?;
    let run = run_storage(&params, &probe, &schedule, &grid)?;
    let eta = storage_efficiency(&reference, &run.record, run.window)?;
    Ok((reference, run.record, run.window, eta))
}

pub fn store(config: &RunConfig, sweep: bool, sink: &mut Sink, log: &mut dyn Write) -> Result<(), CliError> {
    let (reference, stored, window, eta) = storage_records(config)?;
    sink.write("store", &record_table(&stored, None))?;
    sink.write("store_reference", &record_table(&reference, None))?;
    let params = config.lambda_params();
    say(
        log,
        format!("mean_photon_number = {}", fmt_num(gaussian_photon_number(&config.storage_probe(), params.gamma_r_02))),
    )?;
    say(log, format!("retrieval_window_us = [{}, {}]", fmt_num(window.0), fmt_num(window.1)))?;
    say(log, format!("efficiency = {}", fmt_num(eta)))?;
    if sweep {
        let points = storage_sweep(
            &params,
            &config.storage_probe(),
            &config.storage_schedule(),
            &config.storage.tau_s_sweep_us,
            config.storage.step_us,
        )?;
        let mut t = Table::new(&STORAGE_SWEEP_HEADER);
        for p in &points {
            t.push(vec![p.tau_s.into(), p.efficiency.into()]);
        }
        sink.write("storage_sweep", &t)?;
        let taus: Vec<f64> = points.iter().map(|p| p.tau_s).collect();
        let etas: Vec<f64> = points.iter().map(|p| p.efficiency).collect();
        match fit_decay_constant(&taus, &etas) {
            Ok(tc) => say(log, format!("efficiency_decay_us = {}", fmt_num(tc)))?,
            Err(e) => say(log, format!("efficiency_decay_us = nan ({e})"))?,
        }
    }
    Ok(())
}

pub fn aic_table(curve: &[WeightPoint]) -> Table {
    let mut t = Table::new(&AIC_HEADER);
    for p in curve {
        t.push(vec![
            p.omega_c.into(),
            p.rss_eit.into(),
            p.rss_ats.into(),
            p.w_eit.into(),
            p.w_ats.into(),
        ]);
    }
    t
}

/// Weight curve written under `stem`; a missing crossover is reported
/// after the data are on disk.
pub fn aic_to(config: &RunConfig, stem: &str, sink: &mut Sink, log: &mut dyn Write) -> Result<(), CliError> {
    let oc = config.oc_grid();
    if oc[0] > 0.5 || oc[oc.len() - 1] < 25.0 {
        return Err(CliError::Config(format!(
            "aic control grid [{}, {}] must span [0.5, 25] MHz",
            oc[0],
            oc[oc.len() - 1]
        )));
    }
    let curve = aic_weight_curve(&config.lambda_params(), &oc, &config.sweep_settings())?;
    sink.write(stem, &aic_table(&curve))?;
    match find_crossover(&curve) {
        Some(c) => say(log, format!("crossover_mhz = {}", fmt_num(c))),
        None => {
            say(log, "crossover_mhz = nan")?;
            Err(Error::NoCrossing {
                oc_min: oc[0],
                oc_max: oc[oc.len() - 1],
                curve: curve.iter().map(|p| (p.omega_c, p.w_eit)).collect(),
            }
            .into())
        }
    }
}

pub fn aic(config: &RunConfig, sink: &mut Sink, log: &mut dyn Write) -> Result<(), CliError> {
    aic_to(config, "aic", sink, log)
}
