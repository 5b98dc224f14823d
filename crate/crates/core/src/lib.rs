//! Sparse ("Pearson") Schrödinger potentials on the half-line.
//!
//! The crate builds potentials made of widely spaced bumps, propagates
//! solutions of `-u'' + V u = xi u` with exact free gaps, evaluates
//! Christoffel-Darboux kernels by three independent routes, counts and locates
//! Neumann eigenvalues of the restricted operator on `[0, L]`, and turns the
//! perturbation estimates behind sine-kernel universality into measurable probes.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod kernel;
pub mod potential;
pub mod propagate;
pub mod scalar;
pub mod spectrum;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{Complex64, Mat2, Scalar};
