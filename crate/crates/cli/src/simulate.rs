use laserkit::{
    coherent_vector, entropy_closed, evolve_grid, expectation, input_headroom_dim, mean_photon_closed, number,
    state_headroom_dim, von_neumann_entropy, DensityMatrix, IntegrationConfig, KrausSet, LaserParams, C64,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::fmt_float;
use crate::parallel_map;

pub const MIN_AUTO_DIM: usize = 32;
pub const MAX_AUTO_DIM: usize = 512;
const INPUT_TAIL: f64 = 1e-10;
const STATE_TAIL: f64 = 1e-11;

/// Output of a `simulate` run, one row per grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub dim: Option<usize>,
    pub warnings: Vec<String>,
}

impl SimulationTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn formatted_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&x| fmt_float(x)).collect())
            .collect()
    }
}

/// `max(32, ceil(4·max⟨n⟩ + 20))` over the time grid, capped at 512.
///
/// Two refinements keep the matrix methods inside their headroom checks:
/// the coherent input must leave less than `1e-10` on the upper half, and
/// the exact state at the largest-`⟨n⟩` time and at `t_max` must leave less
/// than `1e-11` on the top two levels. Returns the dimension and, when the
/// cap bites, a warning.
pub fn auto_dim(z: C64, params: &LaserParams, times: &[f64]) -> Result<(usize, Option<String>), CliError> {
    let fail = |e: laserkit::Error| CliError::Numerical(format!("auto dimension: {e}"));
    let mut n_max = 0.0f64;
    let mut t_peak = 0.0;
    for &t in times {
        let n = mean_photon_closed(z, params, t).map_err(fail)?;
        if n > n_max {
            n_max = n;
            t_peak = t;
        }
    }
    let wanted = (4.0 * n_max + 20.0)
        .ceil()
        .max(input_headroom_dim(z, INPUT_TAIL) as f64);
    let capped = |why: String| {
        Ok((
            MAX_AUTO_DIM,
            Some(format!(
                "warning: {why}; capped at {MAX_AUTO_DIM}, matrix methods may fail"
            )),
        ))
    };
    if !(wanted <= MAX_AUTO_DIM as f64) {
        return capped(format!("headroom needs dim = {wanted:.0} (max <n> = {n_max:.3e})"));
    }
    let mut dim = (wanted as usize).max(MIN_AUTO_DIM);
    let t_last = times.last().copied().unwrap_or(0.0);
    for t in [t_peak, t_last] {
        match state_headroom_dim(z, params, t, dim, STATE_TAIL, MAX_AUTO_DIM) {
            Ok(d) => dim = d,
            Err(laserkit::Error::Headroom(why)) => return capped(why),
            Err(e) => return Err(fail(e)),
        }
    }
    Ok((dim, None))
}

fn numerical(module: &str, params: &LaserParams, t: Option<f64>, e: laserkit::Error) -> CliError {
    let at = t.map(|t| format!(", t = {t}")).unwrap_or_default();
    CliError::Numerical(format!(
        "{module} at g = {}, kappa = {}{at}: {e}",
        params.g, params.kappa
    ))
}

pub fn simulate(cfg: &RunConfig, threads: Option<usize>) -> Result<SimulationTable, CliError> {
    cfg.validate()?;
    let params = cfg.params()?;
    let z = cfg.z();
    let times = cfg.times();

    let mut header = vec!["t"];
    if cfg.methods.closed {
        header.extend(["n_closed", "S_closed", "specific_entropy"]);
    }
    if cfg.methods.kraus {
        header.extend(["n_kraus", "S_kraus"]);
    }
    if cfg.methods.lindblad {
        header.extend(["n_lindblad", "S_lindblad"]);
    }

    let mut warnings = Vec::new();
    let dim = if cfg.methods.needs_matrices() {
        Some(match cfg.dim {
            Some(d) => d,
            None => {
                let (d, warning) = auto_dim(z, &params, &times)?;
                warnings.extend(warning);
                d
            }
        })
    } else {
        None
    };

    let mut columns: Vec<Vec<f64>> = vec![times.clone()];

    if cfg.methods.closed {
        let mut n_col = Vec::with_capacity(times.len());
        let mut s_col = Vec::with_capacity(times.len());
        let mut spec_col = Vec::with_capacity(times.len());
        for &t in &times {
            let n = mean_photon_closed(z, &params, t).map_err(|e| numerical("closed form", &params, Some(t), e))?;
            let s = entropy_closed(&params, t).map_err(|e| numerical("closed form", &params, Some(t), e))?;
            n_col.push(n);
            s_col.push(s);
            spec_col.push(if n == 0.0 { f64::NAN } else { s / n });
        }
        columns.extend([n_col, s_col, spec_col]);
    }

    if let Some(dim) = dim {
        let rho0 = DensityMatrix::pure(
            &coherent_vector(z, dim, false).map_err(|e| numerical("initial state", &params, None, e))?,
        )
        .map_err(|e| numerical("initial state", &params, None, e))?;
        let number_op = number(dim).map_err(|e| numerical("initial state", &params, None, e))?;
        let observe = |rho: &DensityMatrix| -> laserkit::Result<(f64, f64)> {
            Ok((expectation(rho, &number_op)?.re, von_neumann_entropy(rho)?))
        };

        if cfg.methods.kraus {
            let results = parallel_map(times.len(), threads, |k| {
                let t = times[k];
                let ks = KrausSet::adaptive(&params, t, dim, (dim / 2).max(1))
                    .map_err(|e| numerical("kraus channel", &params, Some(t), e))?;
                let out = ks
                    .apply(&rho0)
                    .map_err(|e| numerical("kraus channel", &params, Some(t), e))?;
                observe(&out.rho).map_err(|e| numerical("kraus channel", &params, Some(t), e))
            })?;
            columns.push(results.iter().map(|r| r.0).collect());
            columns.push(results.iter().map(|r| r.1).collect());
        }

        if cfg.methods.lindblad {
            let states = evolve_grid(&rho0, &params, &times, &IntegrationConfig::for_params(&params))
                .map_err(|e| numerical("lindblad integration", &params, None, e))?;
            let mut n_col = Vec::with_capacity(times.len());
            let mut s_col = Vec::with_capacity(times.len());
            for (rho, &t) in states.iter().zip(&times) {
                let (n, s) = observe(rho).map_err(|e| numerical("lindblad integration", &params, Some(t), e))?;
                n_col.push(n);
                s_col.push(s);
            }
            columns.push(n_col);
            columns.push(s_col);
        }
    }

    let rows = (0..times.len())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    Ok(SimulationTable {
        header,
        rows,
        dim,
        warnings,
    })
}
