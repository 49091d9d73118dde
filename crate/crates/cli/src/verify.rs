//! Self-check suite run by `laserkit verify`.
//!
//! Each check reduces to a single max deviation compared against a
//! tolerance; the strict profile divides every tolerance by ten.

use std::fmt;

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use laserkit::fock::max_abs_diff;
use laserkit::matfun::one_norm;
use laserkit::symplectic::{
    blocks_numeric, laser_blocks_closed, laser_gamma, normal_order_data, pi_matrix, QuadraticForm,
};
use laserkit::{
    coefficients, coherent_vector, entropy_closed, evolve, expectation, factorization_check, input_headroom_dim,
    matrix_exponential, mean_photon_closed, number, recommended_dim, rho_coherent_closed, state_headroom_dim,
    von_neumann_entropy, ClosedPath, DensityMatrix, IntegrationConfig, KrausSet, LaserParams, C64,
};

use crate::config::Profile;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub deviation: f64,
    pub tolerance: f64,
    pub error: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.deviation <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<34} max_dev={:<10.3e} tol={:<8.1e} {}",
            self.name,
            self.deviation,
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        )?;
        if let Some(e) = &self.error {
            write!(f, " ({e})")?;
        }
        Ok(())
    }
}

fn check(name: &'static str, tolerance: f64, f: impl FnOnce() -> laserkit::Result<f64>) -> Check {
    match f() {
        Ok(deviation) => Check {
            name,
            deviation,
            tolerance,
            error: None,
        },
        Err(e) => Check {
            name,
            deviation: f64::NAN,
            tolerance,
            error: Some(e.to_string()),
        },
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn lp(g: f64, kappa: f64) -> laserkit::Result<LaserParams> {
    LaserParams::new(g, kappa)
}

/// Random complex symmetric `Γ` on two modes, scaled to 1-norm `norm`.
pub fn random_gamma(rng: &mut StdRng, norm: f64) -> DMatrix<C64> {
    let m = DMatrix::from_fn(4, 4, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let sym = (&m + m.transpose()) * c(0.5);
    let scale = one_norm(&sym).max(1e-12);
    sym * c(norm / scale)
}

const RATES: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
const BLOCK_TIMES: [f64; 4] = [0.0, 0.1, 0.5, 1.0];
const STATE_GRID: [(f64, f64); 3] = [(0.5, 1.0), (1.0, 1.0), (2.0, 1.0)];
const STATE_TIMES: [f64; 2] = [0.1, 0.3];
const STATE_AMPLITUDES: [f64; 2] = [0.0, 2.0];
const FACTORIZATION_GRID: [(f64, f64, f64); 4] = [(0.5, 1.0, 0.3), (1.0, 1.0, 0.2), (2.0, 1.0, 0.1), (1.0, 0.5, 0.1)];
const FACTORIZATION_DIM: usize = 24;

/// Deviation at one `(g, kappa, z, t)` state-grid point.
type StateMetric = dyn Fn(f64, f64, f64, f64, &Evolved) -> laserkit::Result<f64>;

struct Evolved {
    kraus: DensityMatrix,
    closed: DensityMatrix,
    lindblad: DensityMatrix,
}

fn coherent_rho(z: f64, dim: usize) -> laserkit::Result<DensityMatrix> {
    DensityMatrix::pure(&coherent_vector(c(z), dim, false)?)
}

/// Photon-number rule and input headroom, grown until the exact evolved
/// state leaves less than `1e-12` on the top two levels.
pub fn working_dim(z: f64, params: &LaserParams, t: f64) -> laserkit::Result<usize> {
    let start = recommended_dim(c(z), params, t)?
        .max(input_headroom_dim(c(z), 1e-10))
        .max(32);
    state_headroom_dim(c(z), params, t, start, 1e-12, 256)
}

fn evolve_three_ways(g: f64, kappa: f64, z: f64, t: f64) -> laserkit::Result<Evolved> {
    let params = lp(g, kappa)?;
    let dim = working_dim(z, &params, t)?;
    let rho0 = coherent_rho(z, dim)?;
    let out = KrausSet::adaptive(&params, t, dim, dim / 2)?.apply(&rho0)?;
    Ok(Evolved {
        kraus: out.rho,
        closed: rho_coherent_closed(c(z), &params, t, dim, ClosedPath::Triple)?,
        lindblad: evolve(&rho0, &params, t, &IntegrationConfig::for_params(&params))?,
    })
}

/// Runs every check; never panics on numerical failure.
pub fn run_checks(profile: Profile) -> Vec<Check> {
    let s = profile.scale();
    let mut checks = Vec::new();

    let mut rng = StdRng::seed_from_u64(0x1a5e);
    let gammas: Vec<DMatrix<C64>> = (0..100)
        .map(|k| random_gamma(&mut rng, 0.02 + 1.98 * k as f64 / 99.0))
        .collect();
    checks.push(check("symplectic_block_relations", 1e-10 * s, || {
        let mut worst = 0.0f64;
        for gamma in &gammas {
            worst = worst.max(blocks_numeric(&QuadraticForm::new(gamma.clone())?)?.max_relation_residual());
        }
        Ok(worst)
    }));
    checks.push(check("symplectic_inverse", 1e-10 * s, || {
        let pi = pi_matrix(2)?;
        let mut worst = 0.0f64;
        for gamma in &gammas {
            let m = matrix_exponential(&(gamma * &pi))?;
            let inv = matrix_exponential(&(-(gamma * &pi)))?;
            worst = worst.max(max_abs_diff(&(m * inv), &DMatrix::identity(4, 4)));
        }
        Ok(worst)
    }));
    checks.push(check("symplectic_determinant", 1e-9 * s, || {
        let pi = pi_matrix(2)?;
        let mut worst = 0.0f64;
        for gamma in &gammas {
            worst = worst.max((matrix_exponential(&(gamma * &pi))?.determinant() - c(1.0)).norm());
        }
        Ok(worst)
    }));
    checks.push(check("laser_blocks_closed_vs_numeric", 1e-9 * s, || {
        let mut worst = 0.0f64;
        for g in RATES {
            for kappa in RATES {
                for t in BLOCK_TIMES {
                    let params = lp(g, kappa)?;
                    let numeric = blocks_numeric(&laser_gamma(&params, t)?)?;
                    worst = worst.max(laser_blocks_closed(&params, t)?.max_abs_diff(&numeric));
                }
            }
        }
        Ok(worst)
    }));
    checks.push(check("normal_order_coefficients", 1e-10 * s, || {
        let swap = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let id = DMatrix::<C64>::identity(2, 2);
        let mut worst = 0.0f64;
        for g in RATES {
            for kappa in RATES {
                for t in BLOCK_TIMES {
                    let params = lp(g, kappa)?;
                    let co = coefficients(&params, t)?;
                    let data = normal_order_data(&laser_blocks_closed(&params, t)?)?;
                    worst = worst
                        .max(max_abs_diff(&data.pair_creation, &(&swap * c(g * co.t1))))
                        .max(max_abs_diff(&data.pair_annihilation, &(&swap * c(kappa * co.t1))))
                        .max(max_abs_diff(&data.log_middle, &(&id * c(co.t2.ln()))))
                        .max((data.prefactor * ((kappa - g) * t).exp() - c(co.t3)).norm());
                }
            }
        }
        Ok(worst)
    }));
    checks.push(check("factorization_theorem", 1e-8 * s, || {
        let mut worst = 0.0f64;
        for (g, kappa, t) in FACTORIZATION_GRID {
            worst = worst.max(factorization_check(&lp(g, kappa)?, t, FACTORIZATION_DIM)?);
        }
        Ok(worst)
    }));
    checks.push(check("kraus_completeness", 1e-8 * s, || {
        let mut worst = 0.0f64;
        for (g, kappa, t, dim) in [
            (0.5, 1.0, 0.5, 32),
            (1.0, 1.0, 0.3, 32),
            (2.0, 1.0, 0.2, 48),
            (0.0, 1.0, 1.0, 16),
        ] {
            let ks = KrausSet::adaptive(&lp(g, kappa)?, t, dim, dim / 2)?;
            worst = worst.max(ks.completeness_defect(dim / 2)?);
        }
        Ok(worst)
    }));

    let mut states = Vec::new();
    let mut state_error = None;
    'grid: for (g, kappa) in STATE_GRID {
        for t in STATE_TIMES {
            for z in STATE_AMPLITUDES {
                match evolve_three_ways(g, kappa, z, t) {
                    Ok(e) => states.push((g, kappa, z, t, e)),
                    Err(e) => {
                        state_error = Some(e);
                        break 'grid;
                    }
                }
            }
        }
    }
    let from_states = |f: &StateMetric| -> laserkit::Result<f64> {
        if let Some(e) = &state_error {
            return Err(e.clone());
        }
        let mut worst = 0.0f64;
        for (g, kappa, z, t, e) in &states {
            worst = worst.max(f(*g, *kappa, *z, *t, e)?);
        }
        Ok(worst)
    };
    checks.push(check("kraus_trace_preservation", 1e-8 * s, || {
        from_states(&|_, _, _, _, e| Ok((e.kraus.trace() - 1.0).abs()))
    }));
    checks.push(check("three_way_state_equivalence", 1e-7 * s, || {
        from_states(&|_, _, _, _, e| {
            Ok(max_abs_diff(e.kraus.matrix(), e.closed.matrix())
                .max(max_abs_diff(e.kraus.matrix(), e.lindblad.matrix()))
                .max(max_abs_diff(e.closed.matrix(), e.lindblad.matrix())))
        })
    }));
    checks.push(check("photon_number_law", 1e-6 * s, || {
        from_states(&|g, kappa, z, t, e| {
            let closed = mean_photon_closed(c(z), &lp(g, kappa)?, t)?;
            let numeric = expectation(&e.lindblad, &number(e.lindblad.dim())?)?.re;
            Ok((numeric - closed).abs() / closed.abs().max(1e-300))
        })
    }));
    checks.push(check("entropy_law", 1e-6 * s, || {
        from_states(
            &|g, kappa, _, t, e| Ok((von_neumann_entropy(&e.kraus)? - entropy_closed(&lp(g, kappa)?, t)?).abs()),
        )
    }));
    checks.push(check("entropy_z_independence", 1e-7 * s, || {
        let mut worst = 0.0f64;
        for (g, kappa) in STATE_GRID {
            let params = lp(g, kappa)?;
            let t = 0.3;
            let dim = working_dim(2.0, &params, t)?;
            let mut entropies = Vec::new();
            for z in [0.0, 1.0, 2.0] {
                let out = KrausSet::adaptive(&params, t, dim, dim / 2)?.apply(&coherent_rho(z, dim)?)?;
                entropies.push(von_neumann_entropy(&out.rho)?);
            }
            let lo = entropies.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = entropies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(hi - lo);
        }
        Ok(worst)
    }));
    checks.push(check("asymptote_damping", 1e-3 * s, || {
        let params = lp(0.5, 1.0)?;
        let n = mean_photon_closed(c(4.0), &params, 20.0)?;
        let entropy = entropy_closed(&params, 20.0)?;
        Ok((n - 1.0).abs().max((entropy - 2.0 * std::f64::consts::LN_2).abs()))
    }));
    checks.push(check("asymptote_gain_slope", 1e-2 * s, || {
        let params = lp(2.0, 1.0)?;
        let slope = (entropy_closed(&params, 8.0)? - entropy_closed(&params, 6.0)?) / 2.0;
        Ok((slope - 2.0).abs() / 2.0)
    }));
    checks.push(check("asymptote_balanced", 1e-2 * s, || {
        let params = lp(1.0, 1.0)?;
        let t = 1e4;
        Ok((entropy_closed(&params, t)? - (1.0 + (2.0 * t).ln())).abs())
    }));
    checks.push(check("pure_damping_limit", 1e-8 * s, || {
        let params = lp(0.0, 1.0)?;
        let dim = 32;
        let expected = coherent_rho((-0.5f64).exp(), dim)?;
        let out = KrausSet::adaptive(&params, 0.5, dim, dim / 2)?.apply(&coherent_rho(1.0, dim)?)?;
        let lindblad = evolve(
            &coherent_rho(1.0, dim)?,
            &params,
            0.5,
            &IntegrationConfig::for_params(&params),
        )?;
        Ok(max_abs_diff(out.rho.matrix(), expected.matrix())
            .max(max_abs_diff(lindblad.matrix(), expected.matrix()))
            .max(von_neumann_entropy(&out.rho)?))
    }));

    checks
}
