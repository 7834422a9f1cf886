//! Classical Galton-Watson machinery over the one-generation law.
//!
//! Generation sizes follow X_n = Σ_{i=1..X_{n-1}} ξ_i with ξ the
//! offspring count of one individual over one unit of time. Everything
//! here works through the iterated pgf Π_n = Π ∘ Π_{n-1}:
//!
//! ```text
//! E(X_n)   = μ^n
//! Var(X_n) = σ² μ^n (μ^n - 1) / (μ (μ - 1))    if μ ≠ 1
//!          = n σ²                              if μ = 1
//! ```
//!
//! The extinction probability is the smallest root of Π(s) = s in [0, 1],
//! reached as the monotone limit of Π_n(0).

use crate::error::{Error, Result};
use crate::offspring::JanardanParams;

/// Tolerance on |μ - 1| selecting the critical branch of the generation
/// variance and of the subordinated moments.
pub const CRITICAL_BRANCH_TOL: f64 = 1e-9;

/// Default stopping tolerance for the extinction fixed point.
pub const DEFAULT_FIXED_POINT_TOL: f64 = 1e-12;

/// Default iteration budget for the extinction fixed point.
pub const DEFAULT_MAX_ITER: u64 = 1_000_000;

/// One-generation offspring law with its moments cached.
///
/// The offspring pgf is always evaluated at t = 1: calendar time enters
/// the model only through the generation clock, never here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationLaw {
    offspring: JanardanParams,
    mu: f64,
    sigma2: f64,
}

impl GenerationLaw {
    pub fn new(offspring: JanardanParams) -> Self {
        Self {
            offspring,
            mu: offspring.mean(),
            sigma2: offspring.variance(),
        }
    }

    pub fn offspring(&self) -> &JanardanParams {
        &self.offspring
    }

    /// Cached offspring mean μ.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Cached offspring variance σ².
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// One-generation pgf Π(s) at t = 1.
    pub fn pgf(&self, s: f64) -> f64 {
        self.offspring.pgf_unchecked(s.clamp(0.0, 1.0), 1.0)
    }

    /// n-fold composition Π_n(s); Π_0 is the identity.
    pub fn iterate_pgf(&self, n: u32, s: f64) -> f64 {
        let mut v = s.clamp(0.0, 1.0);
        for _ in 0..n {
            v = self.pgf(v);
        }
        v
    }

    /// E(X_n) = μ^n from a single ancestor.
    pub fn expected_size(&self, n: u32) -> f64 {
        self.mu.powi(n as i32)
    }

    /// Var(X_n) from a single ancestor.
    pub fn variance_size(&self, n: u32) -> f64 {
        if n == 0 {
            return 0.0;
        }
        if (self.mu - 1.0).abs() < CRITICAL_BRANCH_TOL {
            return n as f64 * self.sigma2;
        }
        let mun = self.mu.powi(n as i32);
        self.sigma2 * mun * (mun - 1.0) / (self.mu * (self.mu - 1.0))
    }

    /// Extinction probability q, the smallest root of Π(s) = s.
    ///
    /// Returns exactly 1 when μ ≤ 1. Otherwise iterates s ← Π(s) from
    /// s = 0; the sequence is nondecreasing and converges to the
    /// smallest root from below, so no bracketing is needed. Stops when
    /// a step falls below `tol`; errs with diagnostics if `max_iter` is
    /// exhausted first (near-critical laws converge slowly).
    pub fn extinction_probability(&self, tol: f64, max_iter: u64) -> Result<f64> {
        if self.mu <= 1.0 {
            return Ok(1.0);
        }
        let mut q = 0.0_f64;
        let mut step = f64::INFINITY;
        for _ in 0..max_iter {
            let next = self.pgf(q);
            step = next - q;
            q = next;
            if step < tol {
                return Ok(q);
            }
        }
        Err(Error::Convergence {
            iterations: max_iter,
            last: q,
            step,
        })
    }
}
