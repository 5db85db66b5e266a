//! The five figure data sets, one file each.

use std::io::Write;

use fluxeit_core::config::RunConfig;

use crate::output::{Sink, Table};
use crate::recipes::{self, append_record, RECORD_HEADER};
use crate::CliError;

pub const LINECUT_HEADER: [&str; 6] = ["omega_c_mhz", "delta_p_mhz", "re_t", "im_t", "abs_t", "arg_t_rad"];
pub const DELAY_CURVES_HEADER: [&str; 3] = ["omega_c_mhz", "delta_p_mhz", "tau_d_ns"];

/// File stems in recipe order.
pub const FIGURE_STEMS: [&str; 5] = [
    "power_map",
    "linecuts",
    "delay_curves",
    "envelopes",
    "aic_weights",
];

pub fn linecuts(config: &RunConfig) -> Result<Table, CliError> {
    let params = config.lambda_params();
    let grid = config.delta_grid();
    let mut t = Table::new(&LINECUT_HEADER);
    for &oc in &config.spectroscopy.linecut_omega_c_mhz {
        let spectrum = fluxeit_core::scattering::eit_spectrum(&params, &config.drive_params().with_omega_c(oc), &grid)?;
        for p in spectrum {
            t.push(vec![
                oc.into(),
                p.delta_p.into(),
                p.t.re.into(),
                p.t.im.into(),
                p.t.norm().into(),
                p.t.arg().into(),
            ]);
        }
    }
    Ok(t)
}

pub fn delay_curves(config: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&DELAY_CURVES_HEADER);
    for &oc in &config.spectroscopy.linecut_omega_c_mhz {
        let (_, curve) = recipes::delay_curve(config, oc)?;
        for (d, tau) in curve.delta_p.iter().zip(&curve.tau_d) {
            t.push(vec![oc.into(), (*d).into(), (*tau).into()]);
        }
    }
    Ok(t)
}

/// Slow-light and storage envelopes with their references, tagged by trace.
pub fn envelopes(config: &RunConfig) -> Result<Table, CliError> {
    let (slow_ref, slow, _) = recipes::slow_light_records(config)?;
    let (store_ref, stored, _, _) = recipes::storage_records(config)?;
    let mut t = Table {
        header: std::iter::once("trace").chain(RECORD_HEADER).collect(),
        rows: Vec::new(),
    };
    append_record(&mut t, &slow_ref, Some("slow_reference"));
    append_record(&mut t, &slow, Some("slow"));
    append_record(&mut t, &store_ref, Some("store_reference"));
    append_record(&mut t, &stored, Some("store"));
    Ok(t)
}

pub fn all(config: &RunConfig, sink: &mut Sink, log: &mut dyn Write) -> Result<(), CliError> {
    let [map, cuts, delay, env, weights] = FIGURE_STEMS;
    sink.write(map, &recipes::map_table(config)?)?;
    sink.write(cuts, &linecuts(config)?)?;
    sink.write(delay, &delay_curves(config)?)?;
    sink.write(env, &envelopes(config)?)?;
    recipes::aic_to(config, weights, sink, log)?;
    writeln!(log, "wrote {} figure files to {}", FIGURE_STEMS.len(), sink.dir.display()).map_err(CliError::io)
}
