//! Fourth-order compact discretization of `u_v + a(z) u_z - b(z) u_zz = 0`
//! with backward Euler or Crank-Nicolson time stepping, and stability and
//! conditioning analysis of the fully discrete scheme.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charpoly;
pub mod conditioning;
pub mod constantcase;
pub mod discretization;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod tables;
pub mod timestepper;

pub use error::{Error, Result};
