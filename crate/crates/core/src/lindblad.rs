//! Direct integration of the gain/loss master equation
//!
//! ```text
//! dρ/dt = g[2a†ρa - aa†ρ - ρaa†] + κ[2aρa† - a†aρ - ρa†a]
//! ```
//!
//! with fixed-step RK4 in the truncated number basis. Products of truncated
//! ladder operators are used throughout, which keeps the generator exactly
//! trace-free. Every run is repeated at half the step and the two results
//! must agree; that is the convergence gate.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{check_same_dim, hermitian_part, max_abs_diff, DensityMatrix, FockOperator, C64};
use crate::params::{check_time, LaserParams};

/// Largest entrywise change allowed when the step is halved.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;

/// Fixed-step RK4 settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    pub dt: f64,
    /// Largest population allowed on the top two Fock levels at any step.
    pub boundary_tolerance: f64,
}

impl IntegrationConfig {
    pub fn new(dt: f64, boundary_tolerance: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Domain(format!("time step {dt} must be positive")));
        }
        if !(boundary_tolerance > 0.0 && boundary_tolerance < 1.0) {
            return Err(Error::Domain(format!(
                "boundary tolerance {boundary_tolerance} must lie in (0, 1)"
            )));
        }
        Ok(Self { dt, boundary_tolerance })
    }

    /// `dt = 10⁻³ / max(g, κ, 1)`, boundary tolerance `1e-10`.
    pub fn for_params(params: &LaserParams) -> Self {
        Self {
            dt: 1e-3 / params.max_rate().max(1.0),
            boundary_tolerance: 1e-10,
        }
    }
}

/// Right-hand side of the master equation, `L(ρ)`.
pub fn liouvillian_apply(rho: &DensityMatrix, params: &LaserParams) -> Result<FockOperator> {
    let mut out = DMatrix::zeros(rho.dim(), rho.dim());
    Generator::new(rho.dim(), params).apply(rho.matrix(), &mut out);
    FockOperator::new(out)
}

/// Same as [`liouvillian_apply`] on a raw operator (no state validation).
pub fn liouvillian_apply_operator(op: &FockOperator, params: &LaserParams) -> FockOperator {
    let mut out = DMatrix::zeros(op.dim(), op.dim());
    Generator::new(op.dim(), params).apply(op.matrix(), &mut out);
    FockOperator::new(out).expect("generator of a finite operator is finite")
}

struct Generator {
    dim: usize,
    g: f64,
    kappa: f64,
    sqrt: Vec<f64>,
    /// Diagonal of the truncated product a a†: n+1 below the top level, 0 on it.
    aad: Vec<f64>,
}

impl Generator {
    fn new(dim: usize, params: &LaserParams) -> Self {
        let sqrt = (0..=dim).map(|n| (n as f64).sqrt()).collect();
        let aad = (0..dim)
            .map(|n| if n + 1 < dim { (n + 1) as f64 } else { 0.0 })
            .collect();
        Self {
            dim,
            g: params.g,
            kappa: params.kappa,
            sqrt,
            aad,
        }
    }

    fn apply(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        let d = self.dim;
        for c in 0..d {
            for r in 0..d {
                let here = rho[(r, c)];
                let mut acc = here * -(self.g * (self.aad[r] + self.aad[c]) + self.kappa * (r + c) as f64);
                if r > 0 && c > 0 {
                    acc += rho[(r - 1, c - 1)] * (2.0 * self.g * self.sqrt[r] * self.sqrt[c]);
                }
                if r + 1 < d && c + 1 < d {
                    acc += rho[(r + 1, c + 1)] * (2.0 * self.kappa * self.sqrt[r + 1] * self.sqrt[c + 1]);
                }
                out[(r, c)] = acc;
            }
        }
    }
}

struct Rk4 {
    generator: Generator,
    k1: DMatrix<C64>,
    k2: DMatrix<C64>,
    k3: DMatrix<C64>,
    k4: DMatrix<C64>,
    scratch: DMatrix<C64>,
}

impl Rk4 {
    fn new(dim: usize, params: &LaserParams) -> Self {
        let z = DMatrix::zeros(dim, dim);
        Self {
            generator: Generator::new(dim, params),
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            scratch: z,
        }
    }

    fn step(&mut self, rho: &mut DMatrix<C64>, h: f64) {
        let half = C64::new(0.5 * h, 0.0);
        self.generator.apply(rho, &mut self.k1);
        self.scratch.copy_from(rho);
        axpy(&mut self.scratch, half, &self.k1);
        self.generator.apply(&self.scratch, &mut self.k2);
        self.scratch.copy_from(rho);
        axpy(&mut self.scratch, half, &self.k2);
        self.generator.apply(&self.scratch, &mut self.k3);
        self.scratch.copy_from(rho);
        axpy(&mut self.scratch, C64::new(h, 0.0), &self.k3);
        self.generator.apply(&self.scratch, &mut self.k4);
        let w = h / 6.0;
        axpy(rho, C64::new(w, 0.0), &self.k1);
        axpy(rho, C64::new(2.0 * w, 0.0), &self.k2);
        axpy(rho, C64::new(2.0 * w, 0.0), &self.k3);
        axpy(rho, C64::new(w, 0.0), &self.k4);
        *rho = hermitian_part(rho);
    }
}

/// `y += a·x`.
fn axpy(y: &mut DMatrix<C64>, a: C64, x: &DMatrix<C64>) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += a * xi;
    }
}

fn boundary_population(rho: &DMatrix<C64>) -> f64 {
    let d = rho.nrows();
    (d.saturating_sub(2)..d).map(|n| rho[(n, n)].re).sum()
}

/// Integrates through each time in `times` (ascending, starting at or after
/// zero) with a fixed step no larger than `dt`, returning the state at each.
fn integrate(
    rho0: &DMatrix<C64>,
    params: &LaserParams,
    times: &[f64],
    dt: f64,
    boundary_tolerance: f64,
) -> Result<Vec<DMatrix<C64>>> {
    let mut rk = Rk4::new(rho0.nrows(), params);
    let mut rho = rho0.clone();
    let mut now = 0.0;
    let mut step_index = 0usize;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        check_time(target)?;
        if target < now {
            return Err(Error::Domain(format!(
                "output times must be ascending ({target} after {now})"
            )));
        }
        let span = target - now;
        let steps = (span / dt).ceil() as usize;
        if steps > 0 {
            let h = span / steps as f64;
            for k in 1..=steps {
                rk.step(&mut rho, h);
                step_index += 1;
                let edge = boundary_population(&rho);
                if edge > boundary_tolerance {
                    return Err(Error::Headroom(format!(
                        "population {edge:.3e} on the top two levels of {} at step {step_index} (t = {:.6}, g = {}, kappa = {})",
                        rho.nrows(),
                        now + h * k as f64,
                        params.g,
                        params.kappa
                    )));
                }
            }
        }
        now = target;
        out.push(rho.clone());
    }
    Ok(out)
}

/// States at each of `times`, each gated against a half-step rerun.
pub fn evolve_grid(
    rho0: &DensityMatrix,
    params: &LaserParams,
    times: &[f64],
    config: &IntegrationConfig,
) -> Result<Vec<DensityMatrix>> {
    let coarse = integrate(rho0.matrix(), params, times, config.dt, config.boundary_tolerance)?;
    let fine = integrate(rho0.matrix(), params, times, 0.5 * config.dt, config.boundary_tolerance)?;
    let mut states = Vec::with_capacity(times.len());
    for ((c, f), &t) in coarse.iter().zip(&fine).zip(times) {
        let change = max_abs_diff(c, f);
        if change > CONVERGENCE_TOLERANCE {
            return Err(Error::StepSize(format!(
                "halving dt = {:.3e} changed the state at t = {t} by {change:.3e}",
                config.dt
            )));
        }
        let rho = DensityMatrix::with_tolerance(FockOperator::new(f.clone())?, rho0.trace_tolerance())
            .map_err(|e| Error::Numerical(format!("integrated state at t = {t} is invalid: {e}")))?;
        states.push(rho);
    }
    Ok(states)
}

/// ρ(t) from ρ₀ by RK4 with the half-step convergence gate.
pub fn evolve(rho0: &DensityMatrix, params: &LaserParams, t: f64, config: &IntegrationConfig) -> Result<DensityMatrix> {
    check_time(t)?;
    Ok(evolve_grid(rho0, params, &[t], config)?.remove(0))
}

/// Largest entrywise change between a run at `dt` and one at `dt/2`, plus
/// the change between `dt/2` and `dt/4`; their ratio exposes the order.
pub fn step_halving_errors(rho0: &DensityMatrix, params: &LaserParams, t: f64, dt: f64) -> Result<(f64, f64)> {
    let run = |h: f64| integrate(rho0.matrix(), params, &[t], h, 1.0).map(|mut v| v.remove(0));
    let a = run(dt)?;
    let b = run(0.5 * dt)?;
    let c = run(0.25 * dt)?;
    check_same_dim(a.nrows(), b.nrows())?;
    Ok((max_abs_diff(&a, &b), max_abs_diff(&b, &c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_vector, expectation, number};
    use crate::observables::mean_photon_closed;
    use approx::assert_abs_diff_eq;

    fn p(g: f64, kappa: f64) -> LaserParams {
        LaserParams::new(g, kappa).unwrap()
    }

    fn vacuum(dim: usize) -> DensityMatrix {
        DensityMatrix::pure(&coherent_vector(C64::new(0.0, 0.0), dim, false).unwrap()).unwrap()
    }

    fn coherent(z: f64, dim: usize) -> DensityMatrix {
        DensityMatrix::pure(&coherent_vector(C64::new(z, 0.0), dim, false).unwrap()).unwrap()
    }

    #[test]
    fn vacuum_fixed_under_damping() {
        let l = liouvillian_apply(&vacuum(6), &p(0.0, 1.0)).unwrap();
        assert!(l.max_abs() == 0.0);
    }

    #[test]
    fn vacuum_under_gain() {
        let l = liouvillian_apply(&vacuum(6), &p(1.0, 0.0)).unwrap();
        for r in 0..6 {
            for c in 0..6 {
                let expected = match (r, c) {
                    (0, 0) => -2.0,
                    (1, 1) => 2.0,
                    _ => 0.0,
                };
                assert_eq!(l.matrix()[(r, c)], C64::new(expected, 0.0), "({r},{c})");
            }
        }
    }

    #[test]
    fn generator_is_trace_free_and_gives_rate_equation() {
        let params = p(0.7, 1.3);
        let dim = 90;
        let pops: Vec<f64> = (0..dim).map(|n| (2.0f64 / 3.0).powi(n as i32) / 3.0).collect();
        let rho = DensityMatrix::with_tolerance(FockOperator::diagonal(&pops).unwrap(), 1e-9).unwrap();
        let l = liouvillian_apply(&rho, &params).unwrap();
        assert!(l.trace().norm() <= 1e-12);
        let nbar = 2.0;
        let rate = expectation(
            &DensityMatrix::with_tolerance(rho.op().clone(), 1e-9).unwrap(),
            &number(dim).unwrap(),
        )
        .unwrap()
        .re;
        assert_abs_diff_eq!(rate, nbar, epsilon = 1e-9);
        let dn: C64 = (0..dim).map(|n| l.matrix()[(n, n)] * n as f64).sum();
        assert_abs_diff_eq!(
            dn.re,
            2.0 * params.g * (nbar + 1.0) - 2.0 * params.kappa * nbar,
            epsilon = 1e-9
        );
    }

    #[test]
    fn zero_time_returns_input() {
        let rho0 = coherent(1.0, 20);
        let out = evolve(&rho0, &p(0.5, 1.0), 0.0, &IntegrationConfig::for_params(&p(0.5, 1.0))).unwrap();
        assert_eq!(out.matrix(), rho0.matrix());
    }

    #[test]
    fn coherent_stays_coherent_under_loss() {
        let params = p(0.0, 1.0);
        let out = evolve(
            &coherent(1.0, 32),
            &params,
            0.5,
            &IntegrationConfig::for_params(&params),
        )
        .unwrap();
        let expected = coherent_vector(C64::new((-0.5f64).exp(), 0.0), 32, false)
            .unwrap()
            .projector();
        assert!(max_abs_diff(out.matrix(), expected.matrix()) <= 1e-8);
    }

    #[test]
    fn photon_number_follows_closed_form() {
        let params = p(0.5, 1.0);
        let out = evolve(
            &coherent(2.0, 48),
            &params,
            0.4,
            &IntegrationConfig::for_params(&params),
        )
        .unwrap();
        let n = expectation(&out, &number(48).unwrap()).unwrap().re;
        let closed = mean_photon_closed(C64::new(2.0, 0.0), &params, 0.4).unwrap();
        assert!((n - closed).abs() <= 1e-7, "{n} vs {closed}");
        assert!((out.trace() - coherent(2.0, 48).trace()).abs() <= 1e-12);
        assert_eq!(out.op().hermiticity_defect(), 0.0);
    }

    #[test]
    fn fourth_order_convergence() {
        let params = p(0.5, 1.0);
        let (e1, e2) = step_halving_errors(&coherent(1.0, 24), &params, 0.3, 0.02).unwrap();
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio} ({e1:e}, {e2:e})");
    }

    #[test]
    fn headroom_and_step_errors() {
        let params = p(2.0, 0.0);
        let rho0 = DensityMatrix::pure(&coherent_vector(C64::new(2.0, 0.0), 12, true).unwrap()).unwrap();
        let err = evolve(&rho0, &params, 1.0, &IntegrationConfig::for_params(&params));
        assert!(matches!(err, Err(Error::Headroom(msg)) if msg.contains("step")));

        let coarse = IntegrationConfig::new(0.25, 0.5).unwrap();
        let err = evolve(&coherent(1.0, 24), &p(0.5, 1.0), 0.5, &coarse);
        assert!(matches!(err, Err(Error::StepSize(_))));

        assert!(IntegrationConfig::new(0.0, 1e-10).is_err());
        assert!(IntegrationConfig::new(1e-3, 1.5).is_err());
    }
}
