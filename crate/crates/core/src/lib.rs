//! Polynomial vector-field calculus on the unit disk and the linearized
//! free-boundary incompressible MHD model built on top of it.
//!
//! Planar vector fields are stored as complex-valued polynomials in `z` and
//! `z̄`: the field `(V1, V2)` is `V1 + i V2`. Real scalars use the same type and
//! satisfy conjugate symmetry of their coefficients.

// `!(x < y)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod checks;
pub mod decomp;
pub mod error;
pub mod experiments;
pub mod field;
pub mod linear;
mod ode;
pub mod operators;
mod scalar;
pub mod steady;

pub use error::{Error, Result};
pub use field::{BoundaryTrace, MonomialField};
pub use scalar::Real;

pub use num_complex::Complex;

/// Double-precision field, the default everywhere outside the generic core.
pub type Field = MonomialField<f64>;
/// Single-precision field.
pub type Field32 = MonomialField<f32>;
pub type Trace = BoundaryTrace<f64>;
pub type C64 = Complex<f64>;
pub type HarmonicGradient64 = decomp::HarmonicGradient<f64>;
pub type DecompState64 = decomp::DecompState<f64>;
pub type EnergyReport64 = decomp::EnergyReport<f64>;
pub type LinState64 = linear::LinState<f64>;
pub type SteadyState64 = steady::SteadyState<f64>;
