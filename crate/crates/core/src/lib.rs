//! Optimal dividend barriers for Lévy risk processes with mixed-exponential
//! jumps.
//!
//! The pipeline runs from a [`model::LevyModel`] through the roots of its
//! Laplace exponent ([`roots`]) to ruin probabilities ([`ruin`]) and the
//! barrier solution ([`dividend`]). [`mc`] is an independent simulator used
//! to cross-check the analytic results.

pub mod dividend;
pub mod error;
mod linalg;
pub mod mc;
pub mod model;
pub mod roots;
pub mod ruin;

pub use error::{Error, Result};
