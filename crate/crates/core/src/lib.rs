//! Numerical laboratory for the planar two-fixed-center problem with
//! harmonic-like interactions.
//!
//! A point particle in the plane is tied to two fixed centers at (±1, 0) by
//! harmonic-like forces with a common dimensionless rest length `a`, the only
//! parameter of the model. The crate provides:
//!
//! - the Hamiltonian, vector field, analytic Jacobian, equilibria and
//!   discrete symmetries ([`model`]);
//! - adaptive high-order integration of the flow with event detection and
//!   variational (tangent) dynamics ([`integrator`]);
//! - oriented Poincaré sections on the plane x = 0 with energy-constrained
//!   deterministic random sampling ([`sections`]);
//! - maximal Lyapunov exponents by tangent-vector renormalization ([`chaos`]);
//! - closed-form first-order averaging around the elliptic equilibria,
//!   producing periodic-orbit initial conditions ([`averaging`]);
//! - shooting refinement, monodromy matrices, Floquet multipliers and a
//!   non-integrability probe ([`floquet`]).

// `!(x > 0.0)`-style guards are deliberate: unlike `x <= 0.0` they also
// reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod chaos;
pub mod error;
pub mod floquet;
pub mod integrator;
pub mod model;
pub mod sections;

pub use error::{Error, Result};
