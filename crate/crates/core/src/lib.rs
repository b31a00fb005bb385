//! Performance analysis of a dual-hop fixed-gain relay link with a Rayleigh
//! RF first hop and a Gamma-Gamma optical second hop with pointing errors.
//!
//! [`analytics`] holds the closed-form statistics and metrics, [`montecarlo`]
//! the independent simulation estimators, and [`validation`] runs the two
//! against each other.

pub mod analytics;
pub mod channel;
pub mod curve;
mod error;
pub mod montecarlo;
pub mod specfun;
pub mod validation;

pub use channel::{LinkParams, ModulationSpec};
pub use error::{Error, Result};
