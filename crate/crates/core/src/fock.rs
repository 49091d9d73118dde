//! Operators, pure states and density matrices on a truncated Fock space.
//!
//! Every operator acts on the number states `|0⟩ … |D-1⟩`. Truncation
//! artifacts (for instance the commutator `[a, a†]` failing at the top level)
//! live at level `D-1`, so callers keep populations well below it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum;

pub type C64 = Complex64;

/// Tolerance used by [`DensityMatrix::new`] for the unit-trace check.
pub const DEFAULT_TRACE_TOLERANCE: f64 = 1e-6;

/// Relative Hermiticity tolerance, scaled by the largest entry.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Eigenvalues above this (negative) floor are treated as roundoff.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

/// A square complex matrix in the number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: DMatrix<C64>,
}

impl FockOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::Shape { rows, cols });
        }
        if rows == 0 {
            return Err(Error::InvalidDimension("operator dimension must be at least 1".into()));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("operator has non-finite entries".into()));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            matrix: DMatrix::identity(dim, dim),
        })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            matrix: DMatrix::zeros(dim, dim),
        })
    }

    /// Diagonal operator with the given (real) entries.
    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        check_dim(entries.len())?;
        let diag = DVector::from_iterator(entries.len(), entries.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(DMatrix::from_diagonal(&diag))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self {
            matrix: hermitian_part(&self.matrix),
        }
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }
}

/// Truncated annihilation operator: `√n` at `(n-1, n)`.
pub fn annihilation(dim: usize) -> Result<FockOperator> {
    check_dim(dim)?;
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(FockOperator { matrix: m })
}

pub fn creation(dim: usize) -> Result<FockOperator> {
    Ok(annihilation(dim)?.adjoint())
}

/// `a†a`, built directly as `diag(0, 1, …, D-1)`.
pub fn number(dim: usize) -> Result<FockOperator> {
    check_dim(dim)?;
    let diag: Vec<f64> = (0..dim).map(|n| n as f64).collect();
    FockOperator::diagonal(&diag)
}

/// A pure state in the truncated number basis. The norm is reported, not
/// forced: a truncated coherent state has norm slightly below one.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("state vector has non-finite amplitudes".into()));
        }
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `|ψ⟩⟨ψ|` without renormalization.
    pub fn projector(&self) -> FockOperator {
        FockOperator {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Coherent state `|z⟩ = e^{-|z|²/2} Σ zⁿ/√(n!) |n⟩`, truncated at `dim`.
///
/// Amplitudes are evaluated in log space, so `|z|²` in the hundreds is fine.
pub fn coherent_vector(z: C64, dim: usize, renormalize: bool) -> Result<StateVector> {
    check_dim(dim)?;
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("coherent amplitude {z} is not finite")));
    }
    let r2 = z.norm_sqr();
    if !r2.is_finite() {
        return Err(Error::Overflow(format!("|z|^2 overflows for z = {z}")));
    }
    let mut amps = DVector::zeros(dim);
    if r2 == 0.0 {
        amps[0] = C64::new(1.0, 0.0);
    } else {
        let ln_r = z.norm().ln();
        let phase = z.arg();
        let mut ln_fact = 0.0;
        for n in 0..dim {
            if n > 0 {
                ln_fact += (n as f64).ln();
            }
            let ln_mag = -0.5 * r2 + n as f64 * ln_r - 0.5 * ln_fact;
            if ln_mag > 700.0 {
                return Err(Error::Overflow(format!("coherent amplitude n={n} for z={z}")));
            }
            amps[n] = C64::from_polar(ln_mag.exp(), n as f64 * phase);
        }
    }
    if renormalize {
        let norm = amps.norm();
        if norm == 0.0 {
            return Err(Error::Numerical(format!(
                "coherent state z={z} has no weight below level {dim}"
            )));
        }
        amps /= C64::new(norm, 0.0);
    }
    StateVector::new(amps)
}

/// Hermitian, positive-semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: FockOperator,
    trace_tolerance: f64,
}

impl DensityMatrix {
    pub fn new(op: FockOperator) -> Result<Self> {
        Self::with_tolerance(op, DEFAULT_TRACE_TOLERANCE)
    }

    /// Validates Hermiticity, trace and the eigenvalue floor.
    pub fn with_tolerance(op: FockOperator, trace_tolerance: f64) -> Result<Self> {
        if !(trace_tolerance > 0.0) {
            return Err(Error::Domain(format!(
                "trace tolerance {trace_tolerance} must be positive"
            )));
        }
        let scale = op.max_abs();
        let herm = op.hermiticity_defect();
        if herm > HERMITIAN_TOLERANCE * scale {
            return Err(Error::InvalidState(format!(
                "not Hermitian: defect {herm:.3e} exceeds {:.3e}",
                HERMITIAN_TOLERANCE * scale
            )));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > trace_tolerance || tr.im.abs() > trace_tolerance {
            return Err(Error::InvalidState(format!(
                "trace {tr} differs from 1 by more than {trace_tolerance:.3e}"
            )));
        }
        let eigs = spectrum::hermitian_eigenvalues(&op.matrix)?;
        let min = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        if min < EIGENVALUE_FLOOR {
            return Err(Error::InvalidState(format!(
                "smallest eigenvalue {min:.3e} is below {EIGENVALUE_FLOOR:e}"
            )));
        }
        Ok(Self { op, trace_tolerance })
    }

    /// Symmetrizes `op` before validating; use for results of floating-point
    /// products that are Hermitian in exact arithmetic.
    pub fn from_hermitian_part(op: FockOperator, trace_tolerance: f64) -> Result<Self> {
        Self::with_tolerance(op.hermitian_part(), trace_tolerance)
    }

    pub fn pure(state: &StateVector) -> Result<Self> {
        Self::new(state.projector().hermitian_part())
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &FockOperator {
        &self.op
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.op.matrix()
    }

    pub fn trace_tolerance(&self) -> f64 {
        self.trace_tolerance
    }

    pub fn trace(&self) -> f64 {
        self.op.trace().re
    }

    /// Diagonal of ρ: the photon-number distribution.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.op.matrix[(n, n)].re).collect()
    }

    /// Total population on levels `>= level`.
    pub fn population_from(&self, level: usize) -> f64 {
        self.populations().iter().skip(level).sum()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        spectrum::hermitian_eigenvalues(self.op.matrix())
    }
}

/// `Tr[ρ · obs]`.
pub fn expectation(rho: &DensityMatrix, obs: &FockOperator) -> Result<C64> {
    check_same_dim(rho.dim(), obs.dim())?;
    let r = rho.matrix();
    let o = obs.matrix();
    let n = rho.dim();
    // Tr[ρO] = Σ_rc ρ_rc O_cr, without forming the product.
    let mut acc = C64::new(0.0, 0.0);
    for row in 0..n {
        for col in 0..n {
            acc += r[(row, col)] * o[(col, row)];
        }
    }
    Ok(acc)
}

/// Maximum entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff on mismatched shapes");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// `ln(n!)` for `n = 0..=max`.
pub fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=max {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::InvalidDimension("dimension must be at least 1".into()))
    } else {
        Ok(())
    }
}

pub(crate) fn check_same_dim(left: usize, right: usize) -> Result<()> {
    if left != right {
        Err(Error::DimensionMismatch { left, right })
    } else {
        Ok(())
    }
}
