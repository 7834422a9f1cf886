//! The Janardan offspring distribution.
//!
//! A two-rate arrival mechanism: the first offspring arrives at
//! exponential rate λ, every subsequent one at rate η ≤ λ. Counting
//! arrivals over a window of length t gives the offspring count X(t),
//! whose pgf is
//!
//! ```text
//! Π(s, t) = [ (1-s)(λ-η) e^(-tλ) + s λ e^(-tη(1-s)) ] / (λ - η(1-s))
//! ```
//!
//! The family interpolates between two classical laws:
//! η → λ gives Poisson(tλ), η → 0 gives Bernoulli(1 - e^(-tλ)).
//!
//! One generation of the branching process uses t = 1, so the offspring
//! mean and variance below are the t = 1 moments:
//!
//! ```text
//! μ  = (η/λ)(e^(-λ) + λ - 1) + (1 - e^(-λ))
//! σ² = η² - μ² + (1 - e^(-λ))(1 - η/λ)(1 - 2η/λ) + η(3 - 2η/λ)
//! ```
//!
//! Criticality is decided by μ against 1. The threshold rate
//! g(λ) = λe^(-λ) / (e^(-λ) - 1 + λ) is the η at which μ = 1 exactly
//! (μ is strictly increasing in η), reported alongside for reference.

use crate::error::{domain_err, Result};
use crate::math::{exp_m1_plus_x, ln_factorial};

/// Relative gap below which λ and η are treated as equal and the
/// Poisson limiting expressions are used. Avoids 0/0 in the pgf.
pub const POISSON_LIMIT_REL_TOL: f64 = 1e-9;

/// Default tolerance on |μ - 1| for criticality classification.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// Rate pair (λ, η) of the offspring law, validated at construction:
/// λ > 0 and 0 < η ≤ λ. η = λ is accepted exactly (the Poisson case).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JanardanParams {
    lambda: f64,
    eta: f64,
}

/// Mean and variance of the one-generation offspring count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffspringMoments {
    pub mu: f64,
    pub sigma2: f64,
}

/// Criticality of the branching process driven by this offspring law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
}

impl std::fmt::Display for Criticality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Criticality::Subcritical => "Subcritical",
            Criticality::Critical => "Critical",
            Criticality::Supercritical => "Supercritical",
        };
        f.write_str(s)
    }
}

/// Classification outcome: the status plus the quantities it was
/// decided from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalityReport {
    pub status: Criticality,
    /// Threshold rate g(λ): the η at which the law is exactly critical.
    pub g_value: f64,
    /// Offspring mean the status was decided from.
    pub mu: f64,
}

impl JanardanParams {
    /// Validate and build a rate pair. Requires λ > 0 and 0 < η ≤ λ.
    pub fn new(lambda: f64, eta: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return domain_err(format!("lambda must be a positive finite rate, got {lambda}"));
        }
        if !eta.is_finite() || eta <= 0.0 {
            return domain_err(format!("eta must be a positive finite rate, got {eta}"));
        }
        if eta > lambda {
            return domain_err(format!(
                "eta must not exceed lambda, got eta={eta} > lambda={lambda}"
            ));
        }
        Ok(Self { lambda, eta })
    }

    /// The Poisson member of the family: η = λ = rate.
    pub fn poisson(rate: f64) -> Result<Self> {
        Self::new(rate, rate)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// True when the rates are close enough that the Poisson limiting
    /// expressions are used instead of the generic formulas.
    pub fn is_poisson_limit(&self) -> bool {
        self.lambda - self.eta < POISSON_LIMIT_REL_TOL * self.lambda
    }

    /// Probability generating function Π(s, t) = E(s^X(t)).
    ///
    /// Domain: 0 ≤ s ≤ 1, t ≥ 0. Π(1, t) = 1 and Π(0, t) = e^(-tλ).
    pub fn pgf(&self, s: f64, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return domain_err(format!("pgf argument s={s} outside [0, 1]"));
        }
        if !t.is_finite() || t < 0.0 {
            return domain_err(format!("pgf time t={t} must be finite and nonnegative"));
        }
        Ok(self.pgf_unchecked(s, t))
    }

    /// Π(s, t) without domain checks; callers guarantee 0 ≤ s ≤ 1, t ≥ 0.
    pub(crate) fn pgf_unchecked(&self, s: f64, t: f64) -> f64 {
        let (l, e) = (self.lambda, self.eta);
        if self.is_poisson_limit() {
            return (-t * l * (1.0 - s)).exp();
        }
        // Both numerator terms and both denominator terms are
        // nonnegative on the valid domain, so there is no cancellation.
        let num = (1.0 - s) * (l - e) * (-t * l).exp() + s * l * (-t * e * (1.0 - s)).exp();
        let den = (l - e) + e * s;
        (num / den).clamp(0.0, 1.0)
    }

    /// Pr(X(t) = m), the probability of exactly m arrivals in [0, t].
    ///
    /// Evaluated from the arrival mechanism as
    ///
    /// ```text
    /// Pr(X(t)=m) = λ η^(m-1) e^(-tλ) / (m-1)! · ∫₀ᵗ e^((λ-η)v) v^(m-1) dv,  m ≥ 1
    /// ```
    ///
    /// with the integral expanded as an all-positive power series (a
    /// lower-incomplete-gamma style recurrence). The textbook closed
    /// form subtracts two nearly equal exponential sums and cancels
    /// catastrophically for η < λ and large m; this series does not.
    /// Switches to log-space accumulation once m > 30 or tλ > 30.
    pub fn pmf(&self, m: u64, t: f64) -> Result<f64> {
        if !t.is_finite() || t <= 0.0 {
            return domain_err(format!("pmf time t={t} must be finite and positive"));
        }
        let (l, e) = (self.lambda, self.eta);
        if m == 0 {
            return Ok((-t * l).exp());
        }
        let a = l - e; // >= 0 on the valid domain

        if m <= 30 && t * l <= 30.0 {
            // Linear path. prefactor = λ η^(m-1) t^m e^(-tλ) / m!,
            // accumulated as a product of small factors so nothing
            // overflows within this range.
            let mut w = l * t * (-l * t).exp();
            for k in 2..=m {
                w *= e * t / k as f64;
            }
            return Ok((w * ratio_series_sum(a * t, m)).min(1.0));
        }

        // Log path: ln pmf = ln λ + (m-1) ln η + m ln t - λt - ln m! + ln S.
        let ln_pre =
            l.ln() + (m as f64 - 1.0) * e.ln() + m as f64 * t.ln() - l * t - ln_factorial(m);
        let ln_s = if a * t <= 600.0 {
            ratio_series_sum(a * t, m).ln()
        } else {
            ln_ratio_series_sum_windowed(a * t, m)
        };
        let ln_pmf = ln_pre + ln_s;
        if ln_pmf < -745.0 {
            return Ok(0.0); // below the smallest positive double
        }
        Ok(ln_pmf.exp().min(1.0))
    }

    /// One-generation offspring mean μ = E(X(1)).
    ///
    /// Strictly increasing in η between 1 - e^(-λ) (Bernoulli limit)
    /// and λ (Poisson limit). Exactly λ when η = λ.
    pub fn mean(&self) -> f64 {
        if self.is_poisson_limit() {
            return self.lambda;
        }
        let l = self.lambda;
        (self.eta / l) * exp_m1_plus_x(l) + (1.0 - (-l).exp())
    }

    /// One-generation offspring variance σ² = Var(X(1)).
    pub fn variance(&self) -> f64 {
        if self.is_poisson_limit() {
            return self.lambda;
        }
        let (l, e) = (self.lambda, self.eta);
        let mu = self.mean();
        let em = (-l).exp();
        let r = e / l;
        let v = e * e - mu * mu + (1.0 - em) * (1.0 - r) * (1.0 - 2.0 * r) + e * (3.0 - 2.0 * r);
        v.max(0.0)
    }

    pub fn moments(&self) -> OffspringMoments {
        OffspringMoments {
            mu: self.mean(),
            sigma2: self.variance(),
        }
    }

    /// Decide criticality by comparing μ to 1 within `tol`.
    ///
    /// Equivalent to comparing η against g(λ) since μ is strictly
    /// increasing in η, but numerically direct.
    pub fn classify(&self, tol: f64) -> CriticalityReport {
        let mu = self.mean();
        let status = if (mu - 1.0).abs() <= tol {
            Criticality::Critical
        } else if mu < 1.0 {
            Criticality::Subcritical
        } else {
            Criticality::Supercritical
        };
        CriticalityReport {
            status,
            g_value: g_threshold(self.lambda).expect("lambda validated positive"),
            mu,
        }
    }
}

/// Critical subsequent-offspring rate g(λ) = λ e^(-λ) / (e^(-λ) - 1 + λ).
///
/// This is the η at which the offspring mean equals 1; the denominator
/// is strictly positive for λ > 0.
pub fn g_threshold(lambda: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return domain_err(format!("g threshold needs lambda > 0, got {lambda}"));
    }
    Ok(lambda * (-lambda).exp() / exp_m1_plus_x(lambda))
}

/// S(x, m) = Σ_{k≥0} x^k m / (k! (m+k)), the series factor of the pmf
/// integral relative to its k = 0 term. All terms positive; bounded by e^x.
fn ratio_series_sum(x: f64, m: u64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    let m = m as f64;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 0..100_000u64 {
        let k = k as f64;
        term *= x * (m + k) / ((k + 1.0) * (m + k + 1.0));
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// ln S(x, m) for x too large to sum in linear space: log-sum-exp over a
/// window of k around the dominant term near k ≈ x.
fn ln_ratio_series_sum_windowed(x: f64, m: u64) -> f64 {
    let mf = m as f64;
    let ln_term = |k: u64| -> f64 {
        k as f64 * x.ln() + mf.ln() - ln_factorial(k) - (mf + k as f64).ln()
    };
    let center = x as u64;
    let half = (12.0 * x.sqrt() + 30.0) as u64;
    let lo = center.saturating_sub(half);
    let hi = center + half;
    let peak = ln_term(center);
    let mut sum = 0.0_f64;
    for k in lo..=hi {
        sum += (ln_term(k) - peak).exp();
    }
    peak + sum.ln()
}
