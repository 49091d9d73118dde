//! Normal ordering of quadratic bosonic exponentials and its use to
//! disentangle the vectorized laser propagator.
//!
//! For `H = ½ B Γ Bᵀ` with `B = (A†, A)` and symmetric `Γ`, the blocks of
//! `exp(ΓΠ) = [[Q, L], [N, P]]` give
//!
//! ```text
//! exp H = det(P)^{-1/2} exp{-½ A† (LP⁻¹) A†ᵀ} exp{A† ln(Pᵀ⁻¹) Aᵀ} exp{½ A (P⁻¹N) Aᵀ}.
//! ```
//!
//! The laser uses two modes ordered `A = (ã, a)`: the fictitious mode first,
//! then the real one. Two-mode Fock matrices are indexed the other way, as
//! (real) ⊗ (tilde): basis state `|n⟩|m̃⟩` sits at index `n·dim + m`.

use nalgebra::{DMatrix, DVector};

use crate::channel::coefficients;
use crate::error::{Error, Result};
use crate::fock::{annihilation, max_abs_diff, C64};
use crate::matfun::{matrix_exponential, matrix_log};
use crate::params::{check_time, LaserParams};

const SYMMETRY_TOLERANCE: f64 = 1e-14;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// The symmetric `2n×2n` matrix `Γ` of a quadratic form `½ B Γ Bᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    n_modes: usize,
    gamma: DMatrix<C64>,
}

impl QuadraticForm {
    pub fn new(gamma: DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = gamma.shape();
        if rows != cols {
            return Err(Error::Shape { rows, cols });
        }
        if rows == 0 || rows % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "Γ must be 2n×2n with n >= 1, got {rows}×{rows}"
            )));
        }
        if gamma.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("Γ has non-finite entries".into()));
        }
        let asym = max_abs_diff(&gamma, &gamma.transpose());
        let scale = crate::fock::max_abs(&gamma).max(1.0);
        if asym > SYMMETRY_TOLERANCE * scale {
            return Err(Error::Domain(format!("Γ is not symmetric (defect {asym:.3e})")));
        }
        Ok(Self {
            n_modes: rows / 2,
            gamma,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn gamma(&self) -> &DMatrix<C64> {
        &self.gamma
    }
}

/// `Π = [[0, -Iₙ], [Iₙ, 0]]`.
pub fn pi_matrix(n_modes: usize) -> Result<DMatrix<C64>> {
    if n_modes == 0 {
        return Err(Error::InvalidDimension("Π needs at least one mode".into()));
    }
    let n = n_modes;
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        m[(k, n + k)] = c(-1.0);
        m[(n + k, k)] = c(1.0);
    }
    Ok(m)
}

fn swap2() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

fn id2() -> DMatrix<C64> {
    DMatrix::identity(2, 2)
}

fn block4(q: &DMatrix<C64>, l: &DMatrix<C64>, n: &DMatrix<C64>, p: &DMatrix<C64>) -> DMatrix<C64> {
    let k = q.nrows();
    let mut m = DMatrix::zeros(2 * k, 2 * k);
    m.view_mut((0, 0), (k, k)).copy_from(q);
    m.view_mut((0, k), (k, k)).copy_from(l);
    m.view_mut((k, 0), (k, k)).copy_from(n);
    m.view_mut((k, k), (k, k)).copy_from(p);
    m
}

/// `Γ = t [[2g J₂, -(g+κ) I₂], [-(g+κ) I₂, 2κ J₂]]`, `J₂` the 2×2 swap.
pub fn laser_gamma(params: &LaserParams, t: f64) -> Result<QuadraticForm> {
    check_time(t)?;
    let (g, k) = (params.g, params.kappa);
    let m = block4(
        &(swap2() * c(2.0 * g * t)),
        &(id2() * c(-(g + k) * t)),
        &(id2() * c(-(g + k) * t)),
        &(swap2() * c(2.0 * k * t)),
    );
    QuadraticForm::new(m)
}

/// The `n×n` blocks of `exp(ΓΠ) = [[Q, L], [N, P]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticBlocks {
    pub n_modes: usize,
    pub q: DMatrix<C64>,
    pub l: DMatrix<C64>,
    pub n: DMatrix<C64>,
    pub p: DMatrix<C64>,
}

impl SymplecticBlocks {
    pub fn assemble(&self) -> DMatrix<C64> {
        block4(&self.q, &self.l, &self.n, &self.p)
    }

    /// Max-abs residuals of `QLᵀ = LQᵀ`, `QPᵀ - LNᵀ = I`, `NPᵀ = PNᵀ` and
    /// `PQᵀ - NLᵀ = I`, in that order.
    pub fn relation_residuals(&self) -> [f64; 4] {
        let id = DMatrix::<C64>::identity(self.n_modes, self.n_modes);
        let (q, l, n, p) = (&self.q, &self.l, &self.n, &self.p);
        [
            max_abs_diff(&(q * l.transpose()), &(l * q.transpose())),
            max_abs_diff(&(q * p.transpose() - l * n.transpose()), &id),
            max_abs_diff(&(n * p.transpose()), &(p * n.transpose())),
            max_abs_diff(&(p * q.transpose() - n * l.transpose()), &id),
        ]
    }

    pub fn max_relation_residual(&self) -> f64 {
        self.relation_residuals().into_iter().fold(0.0, f64::max)
    }

    /// Max-abs residual of `M Π Mᵀ = Π`.
    pub fn symplectic_residual(&self) -> f64 {
        let m = self.assemble();
        let pi = pi_matrix(self.n_modes).expect("n_modes >= 1");
        max_abs_diff(&(&m * &pi * m.transpose()), &pi)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.assemble(), &other.assemble())
    }
}

/// Partition of `exp(ΓΠ)` computed numerically.
pub fn blocks_numeric(gamma: &QuadraticForm) -> Result<SymplecticBlocks> {
    let n = gamma.n_modes();
    let m = matrix_exponential(&(gamma.gamma() * pi_matrix(n)?))?;
    Ok(SymplecticBlocks {
        n_modes: n,
        q: m.view((0, 0), (n, n)).into_owned(),
        l: m.view((0, n), (n, n)).into_owned(),
        n: m.view((n, 0), (n, n)).into_owned(),
        p: m.view((n, n), (n, n)).into_owned(),
    })
}

/// `sinh(x)/x`, continuous through zero.
fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 * (1.0 + x2 / 20.0)
    } else {
        x.sinh() / x
    }
}

/// Closed-form blocks for the laser `Γ`.
///
/// With `s = g - κ` and `σ = t·sinh(st)/(st)`:
/// `Q = e^{-st} - 2κσ`, `L = -2gσ J₂`, `N = 2κσ J₂`, `P = e^{st} + 2κσ`.
/// These equal the ratio-of-exponentials expressions, e.g.
/// `Q = (g e^{(κ-g)t} - κ e^{(g-κ)t})/(g-κ)`, and stay finite at `g = κ`,
/// where `Q = 1 - 2gt`, `L = -2gt J₂`, `N = 2gt J₂`, `P = 1 + 2gt`.
pub fn laser_blocks_closed(params: &LaserParams, t: f64) -> Result<SymplecticBlocks> {
    check_time(t)?;
    let (g, k) = (params.g, params.kappa);
    let x = (g - k) * t;
    let sigma = t * sinhc(x);
    Ok(SymplecticBlocks {
        n_modes: 2,
        q: id2() * c((-x).exp() - 2.0 * k * sigma),
        l: swap2() * c(-2.0 * g * sigma),
        n: swap2() * c(2.0 * k * sigma),
        p: id2() * c(x.exp() + 2.0 * k * sigma),
    })
}

/// Ingredients of the normally ordered product.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalOrderData {
    /// `1/√det P`, principal branch.
    pub prefactor: C64,
    /// `-LP⁻¹`; the creation exponent is `½ A† (this) A†ᵀ`.
    pub pair_creation: DMatrix<C64>,
    /// `ln(Pᵀ)⁻¹`, principal logarithm; exponent `A† (this) Aᵀ`.
    pub log_middle: DMatrix<C64>,
    /// `P⁻¹N`; the annihilation exponent is `½ A (this) Aᵀ`.
    pub pair_annihilation: DMatrix<C64>,
}

pub fn normal_order_data(blocks: &SymplecticBlocks) -> Result<NormalOrderData> {
    let det = blocks.p.determinant();
    if det.norm() <= 1e-12 {
        return Err(Error::SingularBlock(format!("det P = {det:.3e}")));
    }
    // The principal square root and logarithm need det P off the cut.
    if det.re <= 0.0 && det.im.abs() <= 1e-12 * det.norm() {
        return Err(Error::SingularBlock(format!(
            "det P = {det} lies on the negative real axis; no principal branch"
        )));
    }
    let p_inv = blocks
        .p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularBlock("P is not invertible".into()))?;
    let log_middle = matrix_log(&p_inv.transpose())?;
    Ok(NormalOrderData {
        prefactor: c(1.0) / det.sqrt(),
        pair_creation: -(&blocks.l * &p_inv),
        log_middle,
        pair_annihilation: &p_inv * &blocks.n,
    })
}

/// `Σ_{n<dim} |n⟩|ñ⟩`: the truncation of `e^{a†ã†}|0 0̃⟩`.
pub fn eta_zero_vector(dim: usize) -> Result<DVector<C64>> {
    if dim == 0 {
        return Err(Error::InvalidDimension("dim must be at least 1".into()));
    }
    let mut v = DVector::zeros(dim * dim);
    for n in 0..dim {
        v[n * dim + n] = c(1.0);
    }
    Ok(v)
}

/// `|ρ⟩ = (ρ ⊗ 1)|η=0⟩`: component `(k, ñ)` is `ρ[k, n]`.
pub fn vectorize(rho: &DMatrix<C64>) -> DVector<C64> {
    let dim = rho.nrows();
    DVector::from_fn(dim * dim, |idx, _| rho[(idx / dim, idx % dim)])
}

pub fn devectorize(v: &DVector<C64>, dim: usize) -> Result<DMatrix<C64>> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            left: v.len(),
            right: dim * dim,
        });
    }
    Ok(DMatrix::from_fn(dim, dim, |k, n| v[k * dim + n]))
}

/// Single-mode operators lifted into the (real) ⊗ (tilde) space.
pub struct TwoModeSpace {
    dim: usize,
    /// Real-mode annihilator `a ⊗ 1`.
    pub a: DMatrix<C64>,
    /// Tilde-mode annihilator `1 ⊗ ã`.
    pub a_tilde: DMatrix<C64>,
}

impl TwoModeSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim * dim > 4096 {
            return Err(Error::InvalidDimension(format!(
                "two-mode dim {dim} must satisfy 1 <= dim² <= 4096"
            )));
        }
        let a1 = annihilation(dim)?.into_matrix();
        let id = DMatrix::<C64>::identity(dim, dim);
        Ok(Self {
            dim,
            a: a1.kronecker(&id),
            a_tilde: id.kronecker(&a1),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self, n: usize, m: usize) -> usize {
        n * self.dim + m
    }

    /// Mode operators in the order `A = (ã, a)`.
    fn modes(&self) -> [&DMatrix<C64>; 2] {
        [&self.a_tilde, &self.a]
    }

    /// `diag(n)` for the real mode and `diag(m)` for the tilde mode.
    fn numbers(&self) -> (DMatrix<C64>, DMatrix<C64>) {
        let d = self.dim;
        let real = DMatrix::from_fn(d * d, d * d, |r, col| if r == col { c((r / d) as f64) } else { c(0.0) });
        let tilde = DMatrix::from_fn(d * d, d * d, |r, col| if r == col { c((r % d) as f64) } else { c(0.0) });
        (real, tilde)
    }

    /// The exponent of the vectorized propagator,
    /// `gt(2a†ã† - aa† - ãã†) + κt(2aã - a†a - ã†ã)`.
    ///
    /// `aa†` is taken as `a†a + 1` on every level, i.e. the compression of
    /// the untruncated operator.
    pub fn laser_generator(&self, params: &LaserParams, t: f64) -> DMatrix<C64> {
        let (g, k) = (params.g * t, params.kappa * t);
        let n2 = self.dim * self.dim;
        let id = DMatrix::<C64>::identity(n2, n2);
        let (nr, nt) = self.numbers();
        let pair_up = self.a.adjoint() * self.a_tilde.adjoint();
        let pair_down = &self.a * &self.a_tilde;
        (pair_up * c(2.0) - &nr - &nt - &id * c(2.0)) * c(g) + (pair_down * c(2.0) - &nr - &nt) * c(k)
    }

    /// `T₃ exp(gT₁ a†ã†) exp(ln T₂ (a†a + ã†ã)) exp(κT₁ aã)`.
    pub fn laser_product_form(&self, params: &LaserParams, t: f64, prefactor: f64) -> Result<DMatrix<C64>> {
        let co = coefficients(params, t)?;
        let d = self.dim;
        let up = matrix_exponential(&(self.a.adjoint() * self.a_tilde.adjoint() * c(params.g * co.t1)))?;
        let down = matrix_exponential(&(&self.a * &self.a_tilde * c(params.kappa * co.t1)))?;
        let middle = DMatrix::from_fn(d * d, d * d, |r, col| {
            if r == col {
                c(co.t2.powi(((r / d) + (r % d)) as i32))
            } else {
                c(0.0)
            }
        });
        Ok(up * middle * down * c(prefactor))
    }

    /// `scalar · det(P)^{-1/2} e^{½A†XA†ᵀ} e^{A†YAᵀ} e^{½AZAᵀ}` assembled from
    /// generic two-mode normal-order data.
    pub fn normal_ordered(&self, data: &NormalOrderData, scalar: C64) -> Result<DMatrix<C64>> {
        if data.pair_creation.shape() != (2, 2) {
            return Err(Error::InvalidDimension("two-mode assembly needs 2×2 blocks".into()));
        }
        let n2 = self.dim * self.dim;
        let modes = self.modes();
        let mut creation = DMatrix::<C64>::zeros(n2, n2);
        let mut middle = DMatrix::<C64>::zeros(n2, n2);
        let mut annihilation = DMatrix::<C64>::zeros(n2, n2);
        for i in 0..2 {
            for j in 0..2 {
                let (ai, aj) = (modes[i], modes[j]);
                creation += ai.adjoint() * aj.adjoint() * (data.pair_creation[(i, j)] * 0.5);
                middle += ai.adjoint() * aj * data.log_middle[(i, j)];
                annihilation += ai * aj * (data.pair_annihilation[(i, j)] * 0.5);
            }
        }
        Ok(matrix_exponential(&creation)?
            * matrix_exponential(&middle)?
            * matrix_exponential(&annihilation)?
            * (scalar * data.prefactor))
    }

    /// Max-abs difference of two two-mode matrices over rows and columns
    /// whose photon numbers are both below `dim/2`.
    pub fn low_block_deviation(&self, x: &DMatrix<C64>, y: &DMatrix<C64>) -> f64 {
        let half = self.dim / 2;
        let low: Vec<usize> = (0..self.dim * self.dim)
            .filter(|&idx| idx / self.dim < half && idx % self.dim < half)
            .collect();
        let mut worst = 0.0f64;
        for &r in &low {
            for &col in &low {
                worst = worst.max((x[(r, col)] - y[(r, col)]).norm());
            }
        }
        worst
    }

    /// Population of the top level after `u` acts on the vectorized vacuum
    /// `|0 0̃⟩`.
    pub fn vacuum_boundary_population(&self, u: &DMatrix<C64>) -> f64 {
        let top = self.dim - 1;
        u[(self.index(top, top), 0)].norm()
    }
}

/// Boundary population above which [`factorization_check`] reports a
/// headroom error.
pub const FACTORIZATION_HEADROOM: f64 = 1e-8;

/// Max-abs deviation, on the low-photon block, between the directly
/// exponentiated two-mode generator and the disentangled product with
/// prefactor `T₃`.
pub fn factorization_check(params: &LaserParams, t: f64, dim: usize) -> Result<f64> {
    let t3 = coefficients(params, t)?.t3;
    factorization_check_with_prefactor(params, t, dim, t3)
}

/// [`factorization_check`] with an arbitrary scalar in front of the
/// product, for probing alternative prefactors.
pub fn factorization_check_with_prefactor(params: &LaserParams, t: f64, dim: usize, prefactor: f64) -> Result<f64> {
    check_time(t)?;
    let space = TwoModeSpace::new(dim)?;
    if t * params.max_rate() > 1.0 {
        return Err(Error::Headroom(format!(
            "t·max(g, kappa) = {} exceeds 1; populations leave a {dim}-level truncation",
            t * params.max_rate()
        )));
    }
    let direct = matrix_exponential(&space.laser_generator(params, t))?;
    let edge = space.vacuum_boundary_population(&direct);
    if edge > FACTORIZATION_HEADROOM {
        return Err(Error::Headroom(format!(
            "evolved vacuum has population {edge:.3e} at the top level (dim = {dim}, g = {}, kappa = {}, t = {t})",
            params.g, params.kappa
        )));
    }
    let product = space.laser_product_form(params, t, prefactor)?;
    Ok(space.low_block_deviation(&direct, &product))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::KrausSet;
    use crate::fock::{coherent_vector, DensityMatrix};
    use proptest::prelude::*;

    fn p(g: f64, kappa: f64) -> LaserParams {
        LaserParams::new(g, kappa).unwrap()
    }

    #[test]
    fn pi_examples() {
        let p1 = pi_matrix(1).unwrap();
        assert_eq!(p1, DMatrix::from_row_slice(2, 2, &[c(0.0), c(-1.0), c(1.0), c(0.0)]));
        for n in 1..4 {
            let pi = pi_matrix(n).unwrap();
            assert_eq!(&pi * &pi, -DMatrix::<C64>::identity(2 * n, 2 * n));
        }
        let p2 = pi_matrix(2).unwrap();
        assert_eq!(p2[(0, 2)], c(-1.0));
        assert_eq!(p2[(1, 3)], c(-1.0));
        assert_eq!(p2[(2, 0)], c(1.0));
        assert_eq!(p2[(3, 1)], c(1.0));
        assert_eq!(p2.iter().filter(|z| z.norm() != 0.0).count(), 4);
        assert!(pi_matrix(0).is_err());
    }

    #[test]
    fn gamma_examples() {
        assert!(laser_gamma(&p(1.0, 2.0), 0.0)
            .unwrap()
            .gamma()
            .iter()
            .all(|z| z.norm() == 0.0));
        let g = laser_gamma(&p(0.0, 1.0), 1.0).unwrap();
        let expected = block4(&DMatrix::zeros(2, 2), &(-id2()), &(-id2()), &(swap2() * c(2.0)));
        assert_eq!(g.gamma(), &expected);
        let g = laser_gamma(&p(2.0, 1.0), 0.5).unwrap();
        let expected = block4(&(swap2() * c(2.0)), &(id2() * c(-1.5)), &(id2() * c(-1.5)), &swap2());
        assert_eq!(g.gamma(), &expected);
        assert!(laser_gamma(&p(1.0, 1.0), -1.0).is_err());
        assert!(QuadraticForm::new(DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(2.0), c(0.0)])).is_err());
    }

    #[test]
    fn zero_gamma_blocks() {
        let b = blocks_numeric(&laser_gamma(&p(1.0, 1.0), 0.0).unwrap()).unwrap();
        assert_eq!(b.q, id2());
        assert_eq!(b.p, id2());
        assert_eq!(b.l, DMatrix::zeros(2, 2));
        assert_eq!(b.n, DMatrix::zeros(2, 2));
        let data = normal_order_data(&b).unwrap();
        assert_eq!(data.prefactor, c(1.0));
        assert!(data
            .pair_creation
            .iter()
            .chain(data.log_middle.iter())
            .all(|z| z.norm() == 0.0));
        assert!(data.pair_annihilation.iter().all(|z| z.norm() == 0.0));
    }

    /// The ratio-of-exponentials block formulas evaluated literally.
    fn literal_blocks(g: f64, k: f64, t: f64) -> SymplecticBlocks {
        let (ep, em) = (((g - k) * t).exp(), ((k - g) * t).exp());
        let d = g - k;
        SymplecticBlocks {
            n_modes: 2,
            q: id2() * c((g * em - k * ep) / d),
            l: swap2() * c(g * (em - ep) / d),
            n: swap2() * c(k * (ep - em) / d),
            p: id2() * c((g * ep - k * em) / d),
        }
    }

    #[test]
    fn closed_blocks_match_literal_and_numeric() {
        let closed = laser_blocks_closed(&p(2.0, 1.0), 0.3).unwrap();
        let numeric = blocks_numeric(&laser_gamma(&p(2.0, 1.0), 0.3).unwrap()).unwrap();
        assert!(closed.max_abs_diff(&numeric) <= 1e-10);
        assert!(closed.max_abs_diff(&literal_blocks(2.0, 1.0, 0.3)) <= 1e-13);

        let e = std::f64::consts::E;
        let pure_loss = laser_blocks_closed(&p(0.0, 1.0), 1.0).unwrap();
        assert!((pure_loss.q[(0, 0)] - c(1.0 / e)).norm() <= 1e-15);
        assert!(pure_loss.l.iter().all(|z| z.norm() == 0.0));
        assert!((pure_loss.n[(0, 1)] - c(e - 1.0 / e)).norm() <= 1e-15);
        assert!((pure_loss.p[(1, 1)] - c(e)).norm() <= 1e-15);
    }

    #[test]
    fn balanced_blocks() {
        let closed = laser_blocks_closed(&p(1.0, 1.0), 0.5).unwrap();
        let numeric = blocks_numeric(&laser_gamma(&p(1.0, 1.0), 0.5).unwrap()).unwrap();
        assert!(closed.max_abs_diff(&numeric) <= 1e-9);
        assert_eq!(closed.q[(0, 0)], c(0.0));
        assert_eq!(closed.p[(0, 0)], c(2.0));
        for eps in [1e-6, -1e-6] {
            let near = literal_blocks(1.0, 1.0 + eps, 0.5);
            assert!(closed.max_abs_diff(&near) <= 1e-5, "eps {eps}");
        }
    }

    #[test]
    fn closed_equals_numeric_on_grid() {
        let rates = [0.0, 0.5, 1.0, 2.0];
        for &g in &rates {
            for &k in &rates {
                for t in [0.0, 0.1, 0.5, 1.0] {
                    let closed = laser_blocks_closed(&p(g, k), t).unwrap();
                    let numeric = blocks_numeric(&laser_gamma(&p(g, k), t).unwrap()).unwrap();
                    let err = closed.max_abs_diff(&numeric);
                    assert!(err <= 1e-9, "g={g} k={k} t={t}: {err:e}");
                }
            }
        }
    }

    #[test]
    fn normal_order_data_for_laser() {
        let (g, k, t) = (1.0, 2.0, 0.4);
        let blocks = laser_blocks_closed(&p(g, k), t).unwrap();
        let data = normal_order_data(&blocks).unwrap();
        let e = (-2.0f64 * (k - g) * t).exp();
        let lp = g * (1.0 - e) / (g * e - k);
        assert!((lp - (-0.355_117_90)).abs() <= 1e-8);
        assert!(max_abs_diff(&data.pair_creation, &(swap2() * c(-lp))) <= 1e-12);
        let pn = k * (e - 1.0) / (g * e - k);
        assert!(max_abs_diff(&data.pair_annihilation, &(swap2() * c(pn))) <= 1e-12);
        let sqrt_det = 2.0 * 0.4f64.exp() - (-0.4f64).exp();
        assert!((sqrt_det - 2.313_329_35).abs() <= 1e-8);
        assert!((data.prefactor - c(1.0 / sqrt_det)).norm() <= 1e-12);
        assert!(max_abs_diff(&data.log_middle, &(id2() * c(-sqrt_det.ln()))) <= 1e-12);

        // The same data through the numeric exponential.
        let numeric = normal_order_data(&blocks_numeric(&laser_gamma(&p(g, k), t).unwrap()).unwrap()).unwrap();
        assert!(max_abs_diff(&numeric.pair_creation, &data.pair_creation) <= 1e-10);
        assert!(max_abs_diff(&numeric.log_middle, &data.log_middle) <= 1e-10);
        assert!(max_abs_diff(&numeric.pair_annihilation, &data.pair_annihilation) <= 1e-10);
    }

    #[test]
    fn normal_order_data_matches_channel_coefficients() {
        // -LP⁻¹ = gT₁ J₂, P⁻¹N = κT₁ J₂, ln P⁻¹ = ln T₂ - (κ-g)t... and
        // e^{(κ-g)t}/√det P = T₃.
        for (g, k, t) in [(0.5, 1.0, 0.3), (2.0, 1.0, 0.2), (1.0, 1.0, 0.7), (0.0, 1.0, 0.5)] {
            let co = coefficients(&p(g, k), t).unwrap();
            let data = normal_order_data(&laser_blocks_closed(&p(g, k), t).unwrap()).unwrap();
            assert!(max_abs_diff(&data.pair_creation, &(swap2() * c(g * co.t1))) <= 1e-12);
            assert!(max_abs_diff(&data.pair_annihilation, &(swap2() * c(k * co.t1))) <= 1e-12);
            let scalar = ((k - g) * t).exp() * data.prefactor;
            assert!((scalar - c(co.t3)).norm() <= 1e-12, "g={g} k={k} t={t}");
            // exp(log_middle) = T₂ · e^{-(κ-g)t}... the middle exponent is -ln p
            // with p = √det P, and T₂ = 1/p.
            assert!(max_abs_diff(&data.log_middle, &(id2() * c(co.t2.ln()))) <= 1e-12);
        }
    }

    #[test]
    fn singular_p_is_rejected() {
        let b = SymplecticBlocks {
            n_modes: 1,
            q: DMatrix::from_element(1, 1, c(1.0)),
            l: DMatrix::zeros(1, 1),
            n: DMatrix::zeros(1, 1),
            p: DMatrix::zeros(1, 1),
        };
        assert!(matches!(normal_order_data(&b), Err(Error::SingularBlock(_))));
        let neg = SymplecticBlocks {
            p: DMatrix::from_element(1, 1, c(-2.0)),
            ..b
        };
        assert!(matches!(normal_order_data(&neg), Err(Error::SingularBlock(_))));
    }

    #[test]
    fn eta_zero_examples() {
        assert_eq!(eta_zero_vector(1).unwrap(), DVector::from_element(1, c(1.0)));
        let v = eta_zero_vector(2).unwrap();
        assert_eq!(v.as_slice(), &[c(1.0), c(0.0), c(0.0), c(1.0)]);

        // a|η=0⟩ = ã†|η=0⟩ and a†|η=0⟩ = ã|η=0⟩ below the top level.
        let dim = 8;
        let space = TwoModeSpace::new(dim).unwrap();
        let v = eta_zero_vector(dim).unwrap();
        let lhs = &space.a * &v;
        let rhs = space.a_tilde.adjoint() * &v;
        let lhs2 = space.a.adjoint() * &v;
        let rhs2 = &space.a_tilde * &v;
        for n in 0..dim - 1 {
            for m in 0..dim - 1 {
                let idx = space.index(n, m);
                assert_eq!(lhs[idx], rhs[idx]);
                assert_eq!(lhs2[idx], rhs2[idx]);
            }
        }
        assert_eq!(vectorize(&DMatrix::identity(dim, dim)), v);
    }

    #[test]
    fn factorization_errors_and_trivial_time() {
        assert_eq!(factorization_check(&p(0.5, 1.0), 0.0, 16).unwrap(), 0.0);
        assert!(matches!(
            factorization_check(&p(2.0, 1.0), 0.8, 16),
            Err(Error::Headroom(_))
        ));
        assert!(matches!(
            factorization_check(&p(0.5, 1.0), 0.3, 65),
            Err(Error::InvalidDimension(_))
        ));
        assert!(factorization_check(&p(0.5, 1.0), -0.1, 8).is_err());
    }

    #[test]
    fn factorization_holds_once_truncation_is_negligible() {
        for (g, k, t) in [(0.5, 1.0, 0.3), (1.0, 1.0, 0.2)] {
            let dev = factorization_check(&p(g, k), t, 24).unwrap();
            assert!(dev <= 1e-8, "g={g} k={k} t={t}: {dev:e}");
        }
    }

    #[test]
    fn factorization_residual_is_truncation_error() {
        // The product's low block is exact; only the direct exponential
        // feels the cutoff, so the residual must fall as dim grows.
        let params = p(0.5, 1.0);
        let devs: Vec<f64> = [14, 16, 20]
            .iter()
            .map(|&d| factorization_check(&params, 0.3, d).unwrap())
            .collect();
        assert!(devs[0] > 2.0 * devs[1] && devs[1] > 10.0 * devs[2], "{devs:?}");
    }

    #[test]
    fn alternative_prefactor_is_rejected() {
        // T₃ e^{-2(κ-g)t}: agrees with T₃ only when g = κ.
        for (g, k, t) in [(0.5, 1.0, 0.3), (1.0, 0.5, 0.1)] {
            let params = p(g, k);
            let t3 = coefficients(&params, t).unwrap().t3;
            let other = t3 * (-2.0 * (k - g) * t).exp();
            let literal = (k - g) / (k * (-2.0 * (g - k) * t).exp() - g);
            assert!((other - literal).abs() <= 1e-14);
            let dev = factorization_check_with_prefactor(&params, t, 14, other).unwrap();
            assert!(dev > 1e-2, "g={g} k={k}: {dev:e}");
        }
        let params = p(1.0, 1.0);
        let t3 = coefficients(&params, 0.1).unwrap().t3;
        let a = factorization_check_with_prefactor(&params, 0.1, 14, t3).unwrap();
        let b = factorization_check(&params, 0.1, 14).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generic_normal_ordered_assembly_matches_product_form() {
        let (params, t, dim) = (p(0.5, 1.0), 0.3, 12);
        let space = TwoModeSpace::new(dim).unwrap();
        let data = normal_order_data(&blocks_numeric(&laser_gamma(&params, t).unwrap()).unwrap()).unwrap();
        let scalar = c((params.net_loss() * t).exp());
        let generic = space.normal_ordered(&data, scalar).unwrap();
        let t3 = coefficients(&params, t).unwrap().t3;
        let specific = space.laser_product_form(&params, t, t3).unwrap();
        assert!(space.low_block_deviation(&generic, &specific) <= 1e-12);
    }

    #[test]
    fn propagator_on_vectorized_state_matches_kraus() {
        let (params, t, dim) = (p(0.5, 1.0), 0.3, 24);
        let rho0 = DensityMatrix::pure(&coherent_vector(C64::new(0.8, 0.3), dim, false).unwrap()).unwrap();
        let space = TwoModeSpace::new(dim).unwrap();
        let t3 = coefficients(&params, t).unwrap().t3;
        let u = space.laser_product_form(&params, t, t3).unwrap();
        let evolved = devectorize(&(u * vectorize(rho0.matrix())), dim).unwrap();
        let kraus = KrausSet::build(&params, t, dim, dim, dim)
            .unwrap()
            .apply(&rho0)
            .unwrap();
        assert!(max_abs_diff(&evolved, kraus.rho.matrix()) <= 1e-12);
    }

    fn symmetric_from(vals: &[f64], n: usize) -> DMatrix<C64> {
        let m = DMatrix::from_fn(2 * n, 2 * n, |r, col| {
            C64::new(vals[(r * 2 * n + col) % vals.len()], 0.0)
        });
        (&m + m.transpose()) * c(0.5)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn random_gamma_is_symplectic(
            vals in proptest::collection::vec(-1.0f64..1.0, 16),
            imag in proptest::collection::vec(-1.0f64..1.0, 16),
            norm in 0.05f64..2.0,
        ) {
            let re = symmetric_from(&vals, 2);
            let im = symmetric_from(&imag, 2);
            let gamma = &re + &im * C64::new(0.0, 1.0);
            let scale = crate::matfun::one_norm(&gamma).max(1e-12);
            let gamma = gamma * c(norm / scale);
            let form = QuadraticForm::new(gamma).unwrap();
            let blocks = blocks_numeric(&form).unwrap();
            prop_assert!(blocks.max_relation_residual() <= 1e-10);
            prop_assert!(blocks.symplectic_residual() <= 1e-10);
            let full = blocks.assemble();
            let gp = form.gamma() * pi_matrix(2).unwrap();
            let inv = matrix_exponential(&(-gp)).unwrap();
            prop_assert!(max_abs_diff(&(&full * inv), &DMatrix::identity(4, 4)) <= 1e-10);
            prop_assert!((full.determinant() - c(1.0)).norm() <= 1e-9);
        }
    }
}
