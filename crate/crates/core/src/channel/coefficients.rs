use crate::error::{Error, Result};
use crate::params::{check_time, LaserParams};

/// `T₁, T₂, T₃` at time `t`.
///
/// With `φ = (1 - e^{-2(κ-g)t})/(κ-g)` these are `T₃ = 1/(1 + gφ)`,
/// `T₁ = φ T₃` and `T₂ = e^{-(κ-g)t} T₃`, which is the same as the
/// ratio-of-exponentials form but finite at `κ = g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCoefficients {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t: f64,
}

impl ChannelCoefficients {
    /// `g·T₁`, the geometric ratio of the thermal part of the output.
    pub fn thermal_ratio(&self, params: &LaserParams) -> f64 {
        params.g * self.t1
    }
}

pub fn coefficients(params: &LaserParams, t: f64) -> Result<ChannelCoefficients> {
    check_time(t)?;
    let phi = params.pump_integral(t)?;
    let denom = 1.0 + params.g * phi;
    let t3 = 1.0 / denom;
    let t1 = phi * t3;
    let t2 = (-params.net_loss() * t).exp() * t3;
    if !(t1.is_finite() && t2.is_finite() && t3.is_finite()) {
        return Err(Error::Domain(format!(
            "channel coefficients are not finite at t={t} (g={}, kappa={})",
            params.g, params.kappa
        )));
    }
    Ok(ChannelCoefficients { t1, t2, t3, t })
}
