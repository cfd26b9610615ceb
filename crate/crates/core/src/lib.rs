//! Certified absolute minima of potentials of spherical point configurations.
//!
//! The pipeline: Gegenbauer analysis of a configuration (its index set), a
//! Hermite-interpolation lower bound for the potential orthogonalized against
//! one Gegenbauer polynomial, and an independent search on the sphere that
//! cross-checks the certified value.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod cli;
pub mod configurations;
pub mod design_analysis;
pub mod error;
pub mod gegenbauer;
pub mod interpolation;
pub mod json;
pub mod polynomial;
pub mod potentials;
pub mod sphere_search;

pub use error::{Error, Result};
pub use polynomial::Polynomial;
