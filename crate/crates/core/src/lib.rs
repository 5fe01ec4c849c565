//! Numerical verification toolkit for the harmonic oscillator with an
//! inverse-square (Hardy) potential on corner domains ℝ^{N−k}×(0,∞)^k:
//! sharp Hardy–Poincaré constant, closed-form ground state, and heat-flow
//! decay in self-similar variables.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod eigen;
pub mod error;
pub mod evolve;
pub mod hardy;
pub mod model;
pub mod quadrature;
pub mod radial;
pub mod special;
pub mod tridiag;

pub use error::{Error, Result};
pub use model::{CornerParams, SeparatedFunction};
pub use radial::{RadialGrid, RadialScheme, TridiagonalOperator};
