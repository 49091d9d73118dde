//! The analytic gain/loss channel.
//!
//! [`coefficients`] gives the three scalars `T₁, T₂, T₃` that parameterize
//! the channel at time `t`; [`KrausSet`] builds the operator-sum
//! representation from them; [`rho_coherent_closed`] is the exact evolved
//! state for a coherent input.

mod closed;
mod coefficients;
mod kraus;

pub use closed::{rho_coherent_closed, ClosedPath};
pub use coefficients::{coefficients, ChannelCoefficients};
pub use kraus::{
    apply_channel, completeness_defect, kraus_set, ChannelOutput, KrausOperator, KrausSet, COMPLETENESS_TARGET,
    HEADROOM_TOLERANCE,
};

use crate::error::{Error, Result};
use crate::fock::C64;
use crate::observables::mean_photon_closed;
use crate::params::LaserParams;

/// Smallest working dimension that keeps the evolved state clear of the
/// truncation boundary: `ceil(4⟨n⟩(t) + 20)`.
pub fn recommended_dim(z: C64, params: &LaserParams, t: f64) -> Result<usize> {
    let n = mean_photon_closed(z, params, t)?;
    Ok((4.0 * n + 20.0).ceil() as usize)
}

/// Smallest even `dim` such that a coherent input `|z⟩` keeps less than
/// `tol` of its population on levels `>= dim / 2`, which is what
/// [`KrausSet::apply`] demands of its input.
pub fn input_headroom_dim(z: C64, tol: f64) -> usize {
    let mean = z.norm_sqr();
    let top = (mean + 12.0 * mean.sqrt() + 64.0).ceil() as usize;
    let ln_fact = crate::fock::ln_factorials(top);
    let pmf: Vec<f64> = (0..=top)
        .map(|n| {
            if mean == 0.0 {
                if n == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (n as f64 * mean.ln() - mean - ln_fact[n]).exp()
            }
        })
        .collect();
    // Summing from the top keeps the small tails accurate.
    let mut tail = 0.0;
    let mut level = top + 1;
    for n in (0..=top).rev() {
        if tail + pmf[n] >= tol {
            break;
        }
        tail += pmf[n];
        level = n;
    }
    2 * level.max(1)
}

/// Grows `start` by a quarter (at least 16) until the exact evolved state
/// at `t` keeps less than `tol` on its top two levels.
///
/// [`recommended_dim`] tracks `⟨n⟩` only. Under gain the displaced thermal
/// tail is much heavier than that, so matrix methods need this search.
/// Errors with [`Error::Headroom`] once `cap` is passed.
pub fn state_headroom_dim(z: C64, params: &LaserParams, t: f64, start: usize, tol: f64, cap: usize) -> Result<usize> {
    let mut dim = start.max(2);
    while dim <= cap {
        // A closed form that fails trace validation has lost weight past dim.
        if let Ok(rho) = rho_coherent_closed(z, params, t, dim, ClosedPath::Triple) {
            let top: f64 = (dim - 2..dim).map(|n| rho.matrix()[(n, n)].re).sum();
            if top < tol {
                return Ok(dim);
            }
        }
        dim += (dim / 4).max(16);
    }
    Err(Error::Headroom(format!(
        "state at t = {t} (g = {}, kappa = {}, z = {z}) needs more than {cap} levels for top population < {tol:e}",
        params.g, params.kappa
    )))
}
