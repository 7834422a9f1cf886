//! Branching-process model of daily close-price ratios.
//!
//! Cumulative price ratios ξ_i = X_i/X₀ are treated as offspring counts
//! of a Galton-Watson process whose offspring law is the two-rate
//! Janardan family (first offspring at rate λ, later ones at rate
//! η ≤ λ), evaluated at a random generation count driven by a Poisson
//! clock with rate θ per day.
//!
//! The crate provides:
//!
//! - [`offspring`]: the offspring law itself: pmf, pgf, moments,
//!   Poisson/Bernoulli limits, criticality classification;
//! - [`branching`]: generation arithmetic over the iterated pgf and the
//!   extinction fixed point;
//! - [`subordinated`]: the clocked ratio process P(t): mean, variance,
//!   zero-probability series, and plot-ready curves;
//! - [`estimation`]: method-of-moments calibration of (λ̂, η̂, θ̂) with a
//!   Poisson-Poisson fallback;
//! - [`pipeline`]: CSV ingestion and the end-to-end trend report;
//! - [`mc`]: a seedable Monte Carlo oracle used to validate all of the
//!   above.
//!
//! Everything is pure and deterministic: the same inputs (including
//! seeds) produce byte-identical outputs.

pub mod branching;
pub mod error;
pub mod estimation;
mod math;
pub mod mc;
pub mod offspring;
pub mod pipeline;
pub mod subordinated;

pub use error::{Error, Result};
