//! Numerical verification of weighted Hardy and Rellich inequalities on
//! complements of closed convex sets.
//!
//! The weight is `c(d) = d^δ (a + b d)^{δ'-δ}` composed with the distance `d`
//! to the convex body `K`. The crate computes the closed-form Hardy and
//! Rellich constants, evaluates Rayleigh quotients of explicit trial
//! functions by quadrature, and brackets the optimal constants between the
//! proven lower bounds and numerically realised upper bounds.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod functionals;
pub mod geometry;
pub mod linalg;
pub mod optimizer;
pub mod profiles;
pub mod quadrature;
pub mod sampling;
pub mod weights;

pub use error::{Error, Result};
