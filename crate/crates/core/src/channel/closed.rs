use nalgebra::DMatrix;

use super::coefficients::coefficients;
use crate::error::{Error, Result};
use crate::fock::{annihilation, coherent_vector, DensityMatrix, FockOperator, StateVector, C64};
use crate::matfun::matrix_exponential;
use crate::params::{check_time, LaserParams};

/// Trace tolerance for closed-form states; the only deficit is the
/// truncated tail.
const CLOSED_TRACE_TOLERANCE: f64 = 1e-6;

/// Minimum number of extra levels for the single-exponential path.
const SINGLE_PATH_PADDING: usize = 32;

/// How [`rho_coherent_closed`] assembles the evolved state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedPath {
    /// `T₃ e^{(κT₁-1)|z|²} e^{zT₂a†} (gT₁)^{a†a} e^{z*T₂a}`.
    Triple,
    /// `T₃ exp{|α|² ln gT₁ + [a†a - (αa† + α*a)] ln gT₁}` with
    /// `α = z e^{(g-κ)t}`: one matrix exponential.
    Single,
}

/// Exact ρ(t) for the initial state `|z⟩⟨z|`, truncated at `dim`.
///
/// It is a displaced thermal state with displacement `z e^{(g-κ)t}` and
/// thermal ratio `gT₁`. For `g = 0` or `t = 0` the thermal part vanishes
/// and the result is the pure coherent projector, returned directly.
pub fn rho_coherent_closed(
    z: C64,
    params: &LaserParams,
    t: f64,
    dim: usize,
    path: ClosedPath,
) -> Result<DensityMatrix> {
    check_time(t)?;
    if dim == 0 {
        return Err(Error::InvalidDimension("closed-form state needs dim >= 1".into()));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("coherent amplitude {z} is not finite")));
    }
    if t == 0.0 || params.g == 0.0 {
        let amplitude = z * (-params.kappa * t).exp();
        return pure_coherent(amplitude, dim);
    }

    let c = coefficients(params, t)?;
    let x = params.g * c.t1;
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Numerical(format!("thermal ratio gT1 = {x} outside (0, 1)")));
    }
    let ln_x = x.ln();
    let m = match path {
        ClosedPath::Triple => {
            let a = annihilation(dim)?.into_matrix();
            let beta = z * c.t2;
            let left = matrix_exponential(&(a.adjoint() * beta))?;
            let right = matrix_exponential(&(&a * beta.conj()))?;
            let middle = DMatrix::from_fn(dim, dim, |r, col| {
                if r == col {
                    C64::new(x.powi(r as i32), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let scalar = c.t3 * ((params.kappa * c.t1 - 1.0) * z.norm_sqr()).exp();
            left * middle * right * C64::new(scalar, 0.0)
        }
        ClosedPath::Single => {
            // The exponent mixes a and a†, so the top rows of a truncated
            // exponential are wrong; evaluate in a larger space and cut back.
            let big = dim + SINGLE_PATH_PADDING.max(dim / 2);
            let a = annihilation(big)?.into_matrix();
            let ad = a.adjoint();
            let alpha = z * (-params.net_loss() * t).exp();
            let id = DMatrix::<C64>::identity(big, big);
            let number = DMatrix::from_fn(big, big, |r, col| {
                if r == col {
                    C64::new(r as f64, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let displaced = &number - &ad * alpha - &a * alpha.conj();
            let exponent = (displaced + &id * C64::new(alpha.norm_sqr(), 0.0)) * C64::new(ln_x, 0.0)
                + &id * C64::new(c.t3.ln(), 0.0);
            matrix_exponential(&exponent)?.view((0, 0), (dim, dim)).into_owned()
        }
    };
    DensityMatrix::from_hermitian_part(FockOperator::new(m)?, CLOSED_TRACE_TOLERANCE)
}

fn pure_coherent(amplitude: C64, dim: usize) -> Result<DensityMatrix> {
    let v: StateVector = coherent_vector(amplitude, dim, false)?;
    DensityMatrix::from_hermitian_part(v.projector(), CLOSED_TRACE_TOLERANCE)
}
