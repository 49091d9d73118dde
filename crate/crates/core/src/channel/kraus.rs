use nalgebra::DMatrix;

use super::coefficients::{coefficients, ChannelCoefficients};
use crate::error::{Error, Result};
use crate::fock::{ln_factorials, DensityMatrix, FockOperator, C64};
use crate::params::LaserParams;

/// Completeness defect the adaptive cutoff has to reach.
pub const COMPLETENESS_TARGET: f64 = 1e-8;

/// Largest population tolerated on the levels the truncation would corrupt.
pub const HEADROOM_TOLERANCE: f64 = 1e-8;

/// `M_ij ∝ T₂^{a†a} a†ʲ aⁱ`.
///
/// Such an operator sends `|n⟩` to a multiple of `|n - i + j⟩`, so it has at
/// most one nonzero entry per column and is stored as that column-indexed
/// list of real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausOperator {
    pub i: usize,
    pub j: usize,
    /// `coeffs[n] = ⟨n - i + j| M_ij |n⟩` for the untruncated operator.
    /// Entries whose target lies past the truncation count towards
    /// completeness but are dropped by `apply` and `to_dense`.
    coeffs: Vec<f64>,
}

impl KrausOperator {
    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Row holding column `n`'s entry, if it lies inside the truncation.
    pub fn target(&self, n: usize) -> Option<usize> {
        let row = n + self.j;
        if n < self.i || row - self.i >= self.dim() {
            None
        } else {
            Some(row - self.i)
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for n in 0..dim {
            if let Some(row) = self.target(n) {
                m[(row, n)] = C64::new(self.coeffs[n], 0.0);
            }
        }
        m
    }
}

/// The truncated family `{M_ij : i <= i_max, j <= j_max}`.
#[derive(Debug, Clone)]
pub struct KrausSet {
    dim: usize,
    i_max: usize,
    j_max: usize,
    params: LaserParams,
    coefficients: ChannelCoefficients,
    operators: Vec<KrausOperator>,
}

/// Result of [`apply_channel`].
#[derive(Debug, Clone)]
pub struct ChannelOutput {
    pub rho: DensityMatrix,
    /// `Tr ρ₀ - Tr ρ(t)`: weight lost to the cutoffs and the truncation.
    pub trace_deficit: f64,
}

pub fn kraus_set(params: &LaserParams, t: f64, dim: usize, i_max: usize, j_max: usize) -> Result<KrausSet> {
    KrausSet::build(params, t, dim, i_max, j_max)
}

pub fn completeness_defect(ks: &KrausSet, probe_dim: usize) -> Result<f64> {
    ks.completeness_defect(probe_dim)
}

pub fn apply_channel(ks: &KrausSet, rho0: &DensityMatrix) -> Result<ChannelOutput> {
    ks.apply(rho0)
}

impl KrausSet {
    pub fn build(params: &LaserParams, t: f64, dim: usize, i_max: usize, j_max: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("Kraus set needs dim >= 1".into()));
        }
        if i_max > dim {
            return Err(Error::InvalidDimension(format!(
                "i_max = {i_max} exceeds dim = {dim}; a^i vanishes for i >= dim"
            )));
        }
        let coeffs = coefficients(params, t)?;
        if !(coeffs.t2 > 0.0) {
            return Err(Error::DegenerateChannel(format!(
                "T2 = {} at t = {t}; the channel has collapsed",
                coeffs.t2
            )));
        }
        let ln_fact = ln_factorials(dim + j_max.max(i_max));
        let ln_t1 = coeffs.t1.ln();
        let ln_t2 = coeffs.t2.ln();
        let ln_t3 = coeffs.t3.ln();

        let mut operators = Vec::with_capacity((i_max + 1) * (j_max + 1));
        for i in 0..=i_max {
            for j in 0..=j_max {
                let mut op = KrausOperator {
                    i,
                    j,
                    coeffs: vec![0.0; dim],
                };
                let vanishes =
                    (i > 0 && params.kappa == 0.0) || (j > 0 && params.g == 0.0) || (i + j > 0 && coeffs.t1 == 0.0);
                if !vanishes {
                    // ln of √(κⁱ gʲ T₃ T₁^{i+j} / (i! j!)); the T₂^{-2j} factor is
                    // folded into the per-column power of T₂ below.
                    let mut ln_pref = ln_t3 - ln_fact[i] - ln_fact[j];
                    if i + j > 0 {
                        ln_pref += (i + j) as f64 * ln_t1;
                    }
                    if i > 0 {
                        ln_pref += i as f64 * params.kappa.ln();
                    }
                    if j > 0 {
                        ln_pref += j as f64 * params.g.ln();
                    }
                    ln_pref *= 0.5;
                    for n in i..dim {
                        let m = n - i;
                        // aⁱ|n⟩ = √(n!/m!) |m⟩, a†ʲ|m⟩ = √((m+j)!/m!) |m+j⟩ and the
                        // combined T₂ power on that column is T₂^{m}.
                        let ln_c = ln_pref
                            + if m > 0 { m as f64 * ln_t2 } else { 0.0 }
                            + 0.5 * (ln_fact[n] - ln_fact[m])
                            + 0.5 * (ln_fact[m + j] - ln_fact[m]);
                        if ln_c > 700.0 {
                            return Err(Error::Overflow(format!(
                                "Kraus coefficient M_({i},{j}) column {n} overflows (ln = {ln_c:.1})"
                            )));
                        }
                        op.coeffs[n] = ln_c.exp();
                    }
                }
                operators.push(op);
            }
        }
        Ok(Self {
            dim,
            i_max,
            j_max,
            params: *params,
            coefficients: coeffs,
            operators,
        })
    }

    /// `i_max = dim` and `j_max` doubled from 8 until the completeness
    /// defect on the first `probe_dim` levels is below
    /// [`COMPLETENESS_TARGET`]. Gives up once `j_max` would pass `4·dim`.
    pub fn adaptive(params: &LaserParams, t: f64, dim: usize, probe_dim: usize) -> Result<Self> {
        let cap = 4 * dim;
        let mut j_max = 8.min(cap);
        loop {
            let ks = Self::build(params, t, dim, dim, j_max)?;
            let defect = ks.completeness_defect(probe_dim)?;
            if defect < COMPLETENESS_TARGET {
                return Ok(ks);
            }
            if j_max >= cap {
                return Err(Error::Completeness(format!(
                    "defect {defect:.3e} on {probe_dim} levels at j_max = {j_max} (dim = {dim}, g = {}, kappa = {}, t = {t})",
                    params.g, params.kappa
                )));
            }
            j_max = (2 * j_max).min(cap);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn i_max(&self) -> usize {
        self.i_max
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn params(&self) -> &LaserParams {
        &self.params
    }

    pub fn coefficients(&self) -> &ChannelCoefficients {
        &self.coefficients
    }

    pub fn time(&self) -> f64 {
        self.coefficients.t
    }

    pub fn operators(&self) -> &[KrausOperator] {
        &self.operators
    }

    pub fn operator(&self, i: usize, j: usize) -> Option<&KrausOperator> {
        if i > self.i_max || j > self.j_max {
            return None;
        }
        self.operators.get(i * (self.j_max + 1) + j)
    }

    /// Diagonal of `Σ M†M` (it has no off-diagonal part).
    pub fn completeness_diagonal(&self) -> Vec<f64> {
        let mut diag = vec![0.0; self.dim];
        for op in &self.operators {
            for (d, c) in diag.iter_mut().zip(&op.coeffs) {
                *d += c * c;
            }
        }
        diag
    }

    /// Max-abs deviation of `Σ M†M` from the identity on the first
    /// `probe_dim` levels.
    pub fn completeness_defect(&self, probe_dim: usize) -> Result<f64> {
        let limit = (self.dim / 2).max(1);
        if probe_dim == 0 || probe_dim > limit {
            return Err(Error::InvalidDimension(format!(
                "probe_dim = {probe_dim} must lie in 1..={limit}"
            )));
        }
        Ok(self
            .completeness_diagonal()
            .iter()
            .take(probe_dim)
            .map(|d| (d - 1.0).abs())
            .fold(0.0, f64::max))
    }

    /// `Σ M ρ₀ M†`.
    pub fn apply(&self, rho0: &DensityMatrix) -> Result<ChannelOutput> {
        let dim = self.dim;
        if rho0.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: rho0.dim(),
            });
        }
        let tail = rho0.population_from(dim.div_ceil(2));
        if tail > HEADROOM_TOLERANCE {
            return Err(Error::Headroom(format!(
                "input population {tail:.3e} on levels >= {} of {dim}",
                dim.div_ceil(2)
            )));
        }
        let src = rho0.matrix();
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        for op in &self.operators {
            // Columns n with i <= n and n - i + j < dim.
            if op.j >= dim || op.is_zero() {
                continue;
            }
            let lo = op.i;
            let hi = (dim - 1).min(dim - 1 - op.j + op.i);
            let shift_up = op.j;
            let shift_down = op.i;
            for b in lo..=hi {
                let cb = op.coeffs[b];
                if cb == 0.0 {
                    continue;
                }
                let col = b + shift_up - shift_down;
                for a in lo..=hi {
                    let ca = op.coeffs[a];
                    if ca == 0.0 {
                        continue;
                    }
                    let row = a + shift_up - shift_down;
                    out[(row, col)] += src[(a, b)] * (ca * cb);
                }
            }
        }
        let out = FockOperator::new(out)?;
        let top: f64 = (dim.saturating_sub(2)..dim).map(|n| out.matrix()[(n, n)].re).sum();
        if top > HEADROOM_TOLERANCE {
            return Err(Error::Headroom(format!(
                "output population {top:.3e} on the top two levels of {dim} (g = {}, kappa = {}, t = {})",
                self.params.g,
                self.params.kappa,
                self.time()
            )));
        }
        let trace_deficit = rho0.trace() - out.trace().re;
        let rho = DensityMatrix::from_hermitian_part(out, rho0.trace_tolerance())
            .map_err(|e| Error::Numerical(format!("channel output failed validation: {e}")))?;
        Ok(ChannelOutput { rho, trace_deficit })
    }
}
