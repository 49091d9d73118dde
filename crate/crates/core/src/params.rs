use crate::error::{Error, Result};

/// Relative threshold on `|κ - g|` below which the balanced (`κ = g`)
/// formulas are used.
pub const BALANCE_THRESHOLD: f64 = 1e-9;

/// Gain rate `g` and loss rate `κ` of the master equation, both in 1/time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    pub g: f64,
    pub kappa: f64,
}

impl LaserParams {
    pub fn new(g: f64, kappa: f64) -> Result<Self> {
        if !g.is_finite() || !kappa.is_finite() {
            return Err(Error::Domain(format!("rates must be finite (g={g}, kappa={kappa})")));
        }
        if g < 0.0 || kappa < 0.0 {
            return Err(Error::Domain(format!(
                "rates must be non-negative (g={g}, kappa={kappa})"
            )));
        }
        Ok(Self { g, kappa })
    }

    /// `κ - g`.
    pub fn net_loss(&self) -> f64 {
        self.kappa - self.g
    }

    pub fn is_balanced(&self) -> bool {
        self.net_loss().abs() <= BALANCE_THRESHOLD * self.g.max(self.kappa).max(1.0)
    }

    pub fn max_rate(&self) -> f64 {
        self.g.max(self.kappa)
    }

    /// `φ(t) = ∫₀ᵗ 2 e^{-2(κ-g)s} ds = (1 - e^{-2(κ-g)t}) / (κ - g)`,
    /// equal to `2t` in the balanced case.
    ///
    /// Every time-dependent coefficient of the channel is a rational
    /// function of `φ` and `e^{-(κ-g)t}`; routing through `expm1` keeps it
    /// accurate on both sides of `κ = g`.
    pub fn pump_integral(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let phi = if self.is_balanced() {
            2.0 * t
        } else {
            let d = self.net_loss();
            -(-2.0 * d * t).exp_m1() / d
        };
        if !phi.is_finite() {
            return Err(Error::Domain(format!(
                "growth integral overflows at t={t} for g={}, kappa={}",
                self.g, self.kappa
            )));
        }
        Ok(phi)
    }

    /// Asymptotic thermal occupation `g(1 - e^{-2(κ-g)t})/(κ-g)` at time `t`.
    pub fn thermal_occupation(&self, t: f64) -> Result<f64> {
        Ok(self.g * self.pump_integral(t)?)
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        Err(Error::Domain(format!("time {t} is not finite")))
    } else if t < 0.0 {
        Err(Error::Domain(format!("time {t} is negative")))
    } else {
        Ok(())
    }
}
