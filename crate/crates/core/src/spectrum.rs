//! Hermitian eigenvalues and the von Neumann entropy.

use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{hermitian_part, DensityMatrix, C64, EIGENVALUE_FLOOR};

/// Eigenvalues (ascending) of the Hermitian part of `m`.
///
/// Backed by faer. nalgebra's symmetric solver returns `-inf` on strongly
/// graded inputs such as late-time channel outputs, whose far corner holds
/// entries near `1e-260`.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::Shape { rows, cols });
    }
    let h = hermitian_part(m);
    let mat = Mat::<C64>::from_fn(rows, cols, |r, c| h[(r, c)]);
    let mut values = mat.self_adjoint_eigenvalues(Side::Lower).map_err(|e| {
        Error::Numerical(format!(
            "Hermitian eigensolver failed on a {rows}x{rows} matrix ({e:?}; max |entry| {:.3e}, trace {})",
            crate::fock::max_abs(m),
            m.trace()
        ))
    })?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "Hermitian eigensolver returned non-finite values on a {rows}x{rows} matrix"
        )));
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `S/k_B = -Σ λ ln λ` over the spectrum of ρ.
///
/// Eigenvalues in `[-1e-10, 0)` are roundoff and clamp to zero; anything
/// more negative is an invalid state.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eigs = rho.eigenvalues()?;
    entropy_of_spectrum(&eigs)
}

pub fn entropy_of_spectrum(eigs: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigs {
        if l < EIGENVALUE_FLOOR {
            return Err(Error::InvalidState(format!(
                "eigenvalue {l:.3e} below {EIGENVALUE_FLOOR:e}"
            )));
        }
        let l = l.clamp(0.0, 1.0);
        if l > 0.0 {
            s -= l * l.ln();
        }
    }
    Ok(s.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_vector, FockOperator};
    use crate::matfun::matrix_exponential;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn pure_state_has_zero_entropy() {
        let vac = DensityMatrix::pure(&coherent_vector(C64::new(0.0, 0.0), 8, false).unwrap()).unwrap();
        assert_eq!(von_neumann_entropy(&vac).unwrap(), 0.0);
    }

    #[test]
    fn underflowing_entries_do_not_poison_the_spectrum() {
        let dim = 96;
        let mut m = DMatrix::<C64>::from_fn(dim, dim, |r, c| {
            if r == c {
                C64::new(0.5f64.powi(r as i32 + 1), 0.0)
            } else {
                C64::from_polar(1e-262 * (1 + r + c) as f64, (r as f64) - (c as f64))
            }
        });
        m = hermitian_part(&m);
        let eigs = hermitian_eigenvalues(&m).unwrap();
        assert!(eigs.iter().all(|v| v.is_finite()));
        assert_abs_diff_eq!(eigs[dim - 1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn maximally_mixed_qubit() {
        let rho = DensityMatrix::new(FockOperator::diagonal(&[0.5, 0.5]).unwrap()).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&rho).unwrap(), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn thermal_state_entropy() {
        // Oracle: geometric populations p_n = (1/3)(2/3)^n summed directly.
        let dim = 200;
        let pops: Vec<f64> = (0..dim).map(|n| (2.0f64 / 3.0).powi(n) / 3.0).collect();
        let oracle: f64 = pops.iter().map(|p| -p * p.ln()).sum();
        assert_abs_diff_eq!(oracle, 3.0 * 3f64.ln() - 2.0 * 2f64.ln(), epsilon = 1e-12);

        let rho = DensityMatrix::new(FockOperator::diagonal(&pops).unwrap()).unwrap();
        let s = von_neumann_entropy(&rho).unwrap();
        assert_abs_diff_eq!(s, 1.909_543, epsilon = 1e-6);
        assert_abs_diff_eq!(s, oracle, epsilon = 1e-8);
    }

    #[test]
    fn spectrum_floor() {
        assert_eq!(entropy_of_spectrum(&[1.0, -5e-11]).unwrap(), 0.0);
        assert!(entropy_of_spectrum(&[1.0, -1e-9]).is_err());
    }

    fn random_hermitian(dim: usize, seed: &[f64]) -> DMatrix<C64> {
        let mut m = DMatrix::from_fn(dim, dim, |r, c| {
            let k = (r * dim + c) % seed.len();
            C64::new(seed[k], seed[(k + 1) % seed.len()])
        });
        m = &m + m.adjoint();
        m
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn entropy_is_unitarily_invariant(
            pops in proptest::collection::vec(0.01f64..1.0, 5),
            seed in proptest::collection::vec(-1.0f64..1.0, 7),
        ) {
            let total: f64 = pops.iter().sum();
            let pops: Vec<f64> = pops.iter().map(|p| p / total).collect();
            let rho = FockOperator::diagonal(&pops).unwrap();
            // U = exp(iH) with H Hermitian.
            let h = random_hermitian(5, &seed) * C64::new(0.0, 1.0);
            let u = matrix_exponential(&h).unwrap();
            let rotated = &u * rho.matrix() * u.adjoint();
            let a = von_neumann_entropy(&DensityMatrix::new(rho).unwrap()).unwrap();
            let b = von_neumann_entropy(
                &DensityMatrix::from_hermitian_part(FockOperator::new(rotated).unwrap(), 1e-9).unwrap(),
            )
            .unwrap();
            prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }
}
