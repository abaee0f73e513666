//! Numerical analysis of Toeplitz operators on weighted harmonic Bergman
//! spaces of the unit ball, built on the dyadic spherical-box decomposition.
//!
//! The crate provides:
//! - ball geometry (Möbius maps, brackets, hyperbolic metric) and the
//!   spherical coordinate map σ : ℚ_n → 𝔹_n,
//! - the dyadic box decomposition with enlargements, location and overlap
//!   queries,
//! - weighted tensor quadrature for dV_λ with anchored prefix integrals,
//! - symbols ψ (builtin radial families, an oscillating family with
//!   arbitrarily fast growing modulus, parsed expressions, truncations),
//! - the weak-Carleson functional ψ̂_j with boundedness/compactness
//!   certificates,
//! - harmonic Bergman kernels R_λ, projections, generalized Toeplitz series
//!   and the analytic-disk specialization,
//! - a validation harness that measures the empirical constants behind the
//!   comparability lemmas.

pub mod basis;
pub mod boxes;
pub mod carleson;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod measure;
pub mod parser;
pub mod special;
pub mod spherical;
pub mod symbol;
pub mod validate;

pub use error::{Error, Result};
