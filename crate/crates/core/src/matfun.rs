//! Dense matrix functions: exponential and principal logarithm.
//!
//! The exponential is Higham's scaling-and-squaring with diagonal Padé
//! approximants of degree 3 to 13 chosen from the 1-norm. It makes no
//! normality assumption, which matters for `ΓΠ` and for the two-mode
//! generators, neither of which is symmetric.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::C64;

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

pub fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn check_square_finite(m: &DMatrix<C64>) -> Result<usize> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::Shape { rows, cols });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite(
            "matrix function argument has non-finite entries".into(),
        ));
    }
    Ok(rows)
}

fn scale(m: &DMatrix<C64>, s: f64) -> DMatrix<C64> {
    m * C64::new(s, 0.0)
}

/// `exp(M)` for an arbitrary complex square matrix.
pub fn matrix_exponential(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = check_square_finite(m)?;
    if n == 0 {
        return Ok(m.clone());
    }
    let norm = one_norm(m);
    let id = DMatrix::<C64>::identity(n, n);

    let (u, v, squarings) = if norm <= THETA_9 {
        let a2 = m * m;
        let (u, v) = if norm <= THETA_3 {
            let b = &PADE_3;
            let u = m * (scale(&a2, b[3]) + scale(&id, b[1]));
            let v = scale(&a2, b[2]) + scale(&id, b[0]);
            (u, v)
        } else if norm <= THETA_5 {
            let b = &PADE_5;
            let a4 = &a2 * &a2;
            let u = m * (scale(&a4, b[5]) + scale(&a2, b[3]) + scale(&id, b[1]));
            let v = scale(&a4, b[4]) + scale(&a2, b[2]) + scale(&id, b[0]);
            (u, v)
        } else if norm <= THETA_7 {
            let b = &PADE_7;
            let a4 = &a2 * &a2;
            let a6 = &a4 * &a2;
            let u = m * (scale(&a6, b[7]) + scale(&a4, b[5]) + scale(&a2, b[3]) + scale(&id, b[1]));
            let v = scale(&a6, b[6]) + scale(&a4, b[4]) + scale(&a2, b[2]) + scale(&id, b[0]);
            (u, v)
        } else {
            let b = &PADE_9;
            let a4 = &a2 * &a2;
            let a6 = &a4 * &a2;
            let a8 = &a6 * &a2;
            let u = m * (scale(&a8, b[9]) + scale(&a6, b[7]) + scale(&a4, b[5]) + scale(&a2, b[3]) + scale(&id, b[1]));
            let v = scale(&a8, b[8]) + scale(&a6, b[6]) + scale(&a4, b[4]) + scale(&a2, b[2]) + scale(&id, b[0]);
            (u, v)
        };
        (u, v, 0u32)
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        let a = scale(m, 2f64.powi(-s));
        let b = &PADE_13;
        let a2 = &a * &a;
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let inner_u = &a6 * (scale(&a6, b[13]) + scale(&a4, b[11]) + scale(&a2, b[9]));
        let u = &a * (inner_u + scale(&a6, b[7]) + scale(&a4, b[5]) + scale(&a2, b[3]) + scale(&id, b[1]));
        let inner_v = &a6 * (scale(&a6, b[12]) + scale(&a4, b[10]) + scale(&a2, b[8]));
        let v = inner_v + scale(&a6, b[6]) + scale(&a4, b[4]) + scale(&a2, b[2]) + scale(&id, b[0]);
        (u, v, s as u32)
    };

    let numer = &v + &u;
    let denom = v - u;
    let mut result = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| Error::Numerical("Padé denominator is singular".into()))?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    if result.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Overflow(format!(
            "matrix exponential overflowed (1-norm of argument {norm:.3e})"
        )));
    }
    Ok(result)
}

/// Principal square root by the Denman–Beavers iteration.
fn sqrt_denman_beavers(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = m.nrows();
    let mut y = m.clone();
    let mut z = DMatrix::<C64>::identity(n, n);
    for _ in 0..100 {
        let y_inv = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularBlock("square-root iteration hit a singular matrix".into()))?;
        let z_inv = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularBlock("square-root iteration hit a singular matrix".into()))?;
        let y_next = (&y + z_inv) * C64::new(0.5, 0.0);
        let z_next = (&z + y_inv) * C64::new(0.5, 0.0);
        let change = one_norm(&(&y_next - &y));
        y = y_next;
        z = z_next;
        if change <= 1e-15 * one_norm(&y).max(1.0) {
            return Ok(y);
        }
    }
    Err(Error::Numerical("matrix square root did not converge".into()))
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// Fails when the matrix is singular or has an eigenvalue on the closed
/// negative real axis, where no principal branch exists.
pub fn matrix_log(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = check_square_finite(m)?;
    let id = DMatrix::<C64>::identity(n, n);
    let mut x = m.clone();
    let mut roots = 0;
    while one_norm(&(&x - &id)) > 0.25 {
        if roots >= 64 {
            return Err(Error::Numerical(
                "matrix logarithm: repeated square roots did not approach the identity".into(),
            ));
        }
        x = sqrt_denman_beavers(&x)?;
        roots += 1;
    }
    // log(I + Y) = Σ (-1)^{k+1} Y^k / k with ||Y||_1 <= 1/4.
    let y = &x - &id;
    let mut term = y.clone();
    let mut acc = DMatrix::<C64>::zeros(n, n);
    for k in 1..=60 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        acc += scale(&term, sign / k as f64);
        if one_norm(&term) / (k as f64) < 1e-18 {
            break;
        }
        term = &term * &y;
    }
    Ok(scale(&acc, 2f64.powi(roots)))
}
