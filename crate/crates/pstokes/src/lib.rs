//! Numerical laboratory for a power-law Stokes-type system on a periodic box.
//!
//! The system is `∇·S(∇u) - ∇π = f`, `∇·u = 0`, with the full-gradient
//! power-law stress `S(∇u) = (mu + |∇u|²)^{(p-2)/2} ∇u`, `p ∈ (1, 2]`,
//! `mu ≥ 0`. The crate provides:
//!
//! * pseudo-spectral fields, derivatives and Lebesgue norms ([`spectral`],
//!   [`field`], [`norms`]);
//! * the pointwise nonlinear algebra of the stress ([`stress`], [`mollify`]);
//! * fundamental-solution calculus — inverse Laplacian, pressure functionals
//!   in mollified/cut-off, cut-off-free and singular (principal value)
//!   variants, and discrete singular-operator norm estimation ([`potentials`],
//!   [`cz`]);
//! * the constructive solver: damped fixed-point iteration for the
//!   regularized systems and a four-parameter continuation (diffusion,
//!   smoothing width, cut-off radius, offset) down to the target system,
//!   plus Helmholtz splitting, pressure reconstruction, an energy-descent
//!   weak solver and divergence diagnostics ([`solver`]);
//! * an executable battery of the quantitative inequalities the construction
//!   rests on, reported with measured constants and margins ([`verify`]).
//!
//! Field algebra is generic over the scalar type; `f64` aliases are exported
//! at the crate root.

pub mod cz;
pub mod error;
pub mod field;
pub mod gen;
pub mod grid;
pub mod io;
pub mod mollify;
pub mod norms;
pub mod potentials;
pub mod real;
pub mod rng;
pub mod solver;
pub mod spectral;
pub mod stress;
pub mod verify;

pub use error::{Error, Result};
pub use field::{
    Field, FieldVariant, ScalarField, Tensor2Field, Tensor3Field, Tensor4Field, VectorField,
};
pub use grid::Grid;
pub use real::{real, Real};
pub use stress::{RegParams, StressParams};

/// `f64` aliases of the field containers.
pub type ScalarField64 = ScalarField<f64>;
pub type VectorField64 = VectorField<f64>;
pub type Tensor2Field64 = Tensor2Field<f64>;
pub type Tensor3Field64 = Tensor3Field<f64>;
pub type Tensor4Field64 = Tensor4Field<f64>;
pub type FieldVariant64 = FieldVariant<f64>;
pub type Solution64 = solver::Solution<f64>;
