//! A single bosonic mode under linear gain `g` and loss `κ`, solved three
//! ways in a truncated Fock space: an explicit Kraus channel, a closed-form
//! displaced thermal state, and direct integration of the master equation.
//!
//! ```
//! use laserkit::{LaserParams, KrausSet, DensityMatrix, coherent_vector, C64};
//!
//! let params = LaserParams::new(0.5, 1.0).unwrap();
//! let rho0 = DensityMatrix::pure(&coherent_vector(C64::new(1.0, 0.0), 48, false).unwrap()).unwrap();
//! let ks = KrausSet::build(&params, 0.3, 48, 48, 47).unwrap();
//! let out = ks.apply(&rho0).unwrap();
//! assert!((out.rho.trace() - 1.0).abs() < 1e-8);
//! ```

// `!(x <= y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod fock;
pub mod lindblad;
pub mod matfun;
pub mod observables;
pub mod params;
pub mod spectrum;
pub mod symplectic;

pub use channel::{
    apply_channel, coefficients, completeness_defect, input_headroom_dim, kraus_set, recommended_dim,
    rho_coherent_closed, state_headroom_dim, ChannelCoefficients, ChannelOutput, ClosedPath, KrausOperator, KrausSet,
};
pub use error::{Error, Result};
pub use fock::{
    annihilation, coherent_vector, creation, expectation, number, DensityMatrix, FockOperator, StateVector, C64,
};
pub use lindblad::{evolve, evolve_grid, IntegrationConfig};
pub use matfun::{matrix_exponential, matrix_log};
pub use observables::{
    asymptotics, entropy_closed, equivalent_temperature, mean_photon_closed, specific_entropy, Regime, RegimeKind,
};
pub use params::LaserParams;
pub use spectrum::von_neumann_entropy;
pub use symplectic::{factorization_check, NormalOrderData, QuadraticForm, SymplecticBlocks};
