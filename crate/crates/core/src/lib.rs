//! Bayesian cross-validation, WAIC, DIC and functional-cumulant tooling for
//! regular and singular statistical models.
//!
//! The pipeline is: a [`models::Scenario`] (model plus true distribution) and a
//! [`models::Dataset`] yield a [`posterior::PosteriorEnsemble`] at inverse
//! temperature `beta`; [`cumulants`] and [`criteria`] are functionals of the
//! ensemble's cached log-likelihood matrix; [`experiments`] repeats all of this
//! over independent datasets and aggregates.

pub mod cli;
pub mod config;
pub mod conjugate;
pub mod criteria;
pub mod cumulants;
pub mod error;
pub mod experiments;
pub mod models;
pub mod numeric;
pub mod oracle;
pub mod posterior;

pub use error::{Error, Result};
