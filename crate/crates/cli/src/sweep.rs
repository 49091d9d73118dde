use laserkit::{entropy_closed, mean_photon_closed, LaserParams};

use crate::config::SweepConfig;
use crate::error::CliError;
use crate::output::fmt_float;
use crate::parallel_map;

pub const SWEEP_HEADER: [&str; 7] = ["series", "g", "kappa", "t", "n", "S", "specific_entropy"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub series: usize,
    pub g: f64,
    pub kappa: f64,
    pub t: f64,
    pub n: f64,
    pub entropy: f64,
    pub specific_entropy: f64,
}

impl SweepRow {
    pub fn formatted(&self) -> Vec<String> {
        vec![
            self.series.to_string(),
            fmt_float(self.g),
            fmt_float(self.kappa),
            fmt_float(self.t),
            fmt_float(self.n),
            fmt_float(self.entropy),
            fmt_float(self.specific_entropy),
        ]
    }
}

/// Closed-form series for each gain value, series-major then time.
pub fn sweep(cfg: &SweepConfig, threads: Option<usize>) -> Result<Vec<SweepRow>, CliError> {
    cfg.validate()?;
    let z = cfg.z();
    let times = cfg.times();
    let series = parallel_map(cfg.g_list.len(), threads, |s| {
        let g = cfg.g_list[s];
        let params = LaserParams::new(g, cfg.kappa).map_err(|e| CliError::Config(e.to_string()))?;
        times
            .iter()
            .map(|&t| {
                let fail = |e: laserkit::Error| {
                    CliError::Numerical(format!("closed form at g = {g}, kappa = {}, t = {t}: {e}", cfg.kappa))
                };
                let n = mean_photon_closed(z, &params, t).map_err(fail)?;
                let entropy = entropy_closed(&params, t).map_err(fail)?;
                Ok(SweepRow {
                    series: s,
                    g,
                    kappa: cfg.kappa,
                    t,
                    n,
                    entropy,
                    specific_entropy: if n == 0.0 { f64::NAN } else { entropy / n },
                })
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    Ok(series.into_iter().flatten().collect())
}
