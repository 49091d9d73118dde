//! Closed-form photon number and entropy for a coherent input, and their
//! long-time behaviour.
//!
//! The evolved state is a displaced thermal state whose thermal occupation
//! is `n̄(t) = gφ(t)` (see [`LaserParams::pump_integral`]); the entropy is
//! that of the thermal part alone and so carries no `z` dependence.

use crate::channel::coefficients;
use crate::error::{Error, Result};
use crate::fock::C64;
use crate::params::{check_time, LaserParams};

/// `⟨n⟩(t) = g(1 - e^{-2(κ-g)t})/(κ-g) + |z|² e^{-2(κ-g)t}`; `|z|² + 2gt`
/// when `κ = g`.
pub fn mean_photon_closed(z: C64, params: &LaserParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let thermal = params.thermal_occupation(t)?;
    let decay = if params.is_balanced() {
        1.0
    } else {
        (-2.0 * params.net_loss() * t).exp()
    };
    let n = thermal + z.norm_sqr() * decay;
    if !n.is_finite() {
        return Err(Error::Domain(format!("photon number overflows at t = {t}")));
    }
    Ok(n)
}

/// Entropy of a thermal state with occupation `n̄`:
/// `(n̄+1) ln(n̄+1) - n̄ ln n̄`.
pub fn thermal_entropy(nbar: f64) -> f64 {
    if nbar <= 0.0 {
        0.0
    } else {
        nbar.ln_1p() + nbar * (1.0 / nbar).ln_1p()
    }
}

/// `S/k_B` at time `t`, evaluated in the thermal form with `n̄ = gT₁/T₃`.
pub fn entropy_closed(params: &LaserParams, t: f64) -> Result<f64> {
    Ok(thermal_entropy(params.thermal_occupation(t)?))
}

/// `S/k_B = -(ln T₃ + gT₁ ln(gT₁)/(1 - gT₁))`, literally.
///
/// Algebraically identical to [`entropy_closed`], which is the better
/// conditioned of the two for large `n̄`.
pub fn entropy_from_coefficients(params: &LaserParams, t: f64) -> Result<f64> {
    let c = coefficients(params, t)?;
    let x = params.g * c.t1;
    if x == 0.0 {
        return Ok(-c.t3.ln());
    }
    Ok(-(c.t3.ln() + x * x.ln() / (1.0 - x)))
}

/// `S / ⟨n⟩` in units of `k_B`.
pub fn specific_entropy(z: C64, params: &LaserParams, t: f64) -> Result<f64> {
    let n = mean_photon_closed(z, params, t)?;
    if n == 0.0 {
        return Err(Error::UndefinedRatio(format!(
            "photon number vanishes at t = {t} (z = {z}, g = {})",
            params.g
        )));
    }
    Ok(entropy_closed(params, t)? / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    /// `κ > g`
    DampingDominated,
    /// `κ = g`
    Balanced,
    /// `κ < g`
    GainDominated,
}

/// Leading large-`t` behaviour of `⟨n⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhotonAsymptote {
    Constant(f64),
    /// `intercept + slope·t`
    Linear {
        slope: f64,
        intercept: f64,
    },
    /// `prefactor·e^{rate·t}`
    Exponential {
        prefactor: f64,
        rate: f64,
    },
}

/// Leading large-`t` behaviour of `S/k_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyAsymptote {
    Constant(f64),
    /// `offset + coefficient·ln t`
    Logarithmic {
        offset: f64,
        coefficient: f64,
    },
    /// `intercept + slope·t`
    Linear {
        slope: f64,
        intercept: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub kind: RegimeKind,
    pub photon: PhotonAsymptote,
    pub entropy: EntropyAsymptote,
}

impl Regime {
    /// Limiting photon number, when there is one.
    pub fn n_asymptote(&self) -> Option<f64> {
        match self.photon {
            PhotonAsymptote::Constant(v) => Some(v),
            _ => None,
        }
    }

    pub fn photon_at(&self, t: f64) -> f64 {
        match self.photon {
            PhotonAsymptote::Constant(v) => v,
            PhotonAsymptote::Linear { slope, intercept } => intercept + slope * t,
            PhotonAsymptote::Exponential { prefactor, rate } => prefactor * (rate * t).exp(),
        }
    }

    pub fn entropy_at(&self, t: f64) -> f64 {
        match self.entropy {
            EntropyAsymptote::Constant(v) => v,
            EntropyAsymptote::Logarithmic { offset, coefficient } => offset + coefficient * t.ln(),
            EntropyAsymptote::Linear { slope, intercept } => intercept + slope * t,
        }
    }
}

pub fn asymptotics(z: C64, params: &LaserParams) -> Regime {
    let (g, kappa) = (params.g, params.kappa);
    let r2 = z.norm_sqr();
    if params.is_balanced() {
        let entropy = if g == 0.0 {
            EntropyAsymptote::Constant(0.0)
        } else {
            EntropyAsymptote::Logarithmic {
                offset: 1.0 + (2.0 * g).ln(),
                coefficient: 1.0,
            }
        };
        Regime {
            kind: RegimeKind::Balanced,
            photon: PhotonAsymptote::Linear {
                slope: 2.0 * g,
                intercept: r2,
            },
            entropy,
        }
    } else if kappa > g {
        let d = kappa - g;
        let entropy = if g == 0.0 {
            0.0
        } else {
            (kappa / d).ln() + (g / d) * (kappa / g).ln()
        };
        Regime {
            kind: RegimeKind::DampingDominated,
            photon: PhotonAsymptote::Constant(g / d),
            entropy: EntropyAsymptote::Constant(entropy),
        }
    } else {
        let s = g - kappa;
        Regime {
            kind: RegimeKind::GainDominated,
            photon: PhotonAsymptote::Exponential {
                prefactor: g / s + r2,
                rate: 2.0 * s,
            },
            entropy: EntropyAsymptote::Linear {
                slope: 2.0 * s,
                intercept: 1.0 + (g / s).ln(),
            },
        }
    }
}

/// Temperature whose Bose–Einstein occupancy equals the steady-state
/// `n̄ = g/(κ-g)`: `T = (ħω/k_B) / ln(κ/g)`.
///
/// `hbar_omega_over_kb` carries the units. Pure loss (`g = 0`) relaxes to
/// the vacuum and gives `T = 0`.
pub fn equivalent_temperature(params: &LaserParams, hbar_omega_over_kb: f64) -> Result<f64> {
    if !(hbar_omega_over_kb > 0.0) || !hbar_omega_over_kb.is_finite() {
        return Err(Error::Domain(format!(
            "energy scale {hbar_omega_over_kb} must be positive"
        )));
    }
    if params.kappa <= params.g || params.is_balanced() {
        return Err(Error::NoEquilibrium(format!(
            "gain g = {} is not below loss kappa = {}",
            params.g, params.kappa
        )));
    }
    if params.g == 0.0 {
        return Ok(0.0);
    }
    Ok(hbar_omega_over_kb / (params.kappa / params.g).ln())
}
