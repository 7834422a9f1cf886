//! Method-of-moments calibration of (λ, η, θ) from cumulative ratios.
//!
//! The zero-class indicator Z = 1{ξ < 1} is Bernoulli with
//! E(Z) = e^(-λ), so λ̂ = ln(n / f₀) where f₀ counts ratios strictly
//! below one (ties count as survivors). Matching the first moment then
//! gives
//!
//! ```text
//! η̂ = λ̂ (x̄ - 1 + e^(-λ̂)) / (λ̂ - 1 + e^(-λ̂))
//! ```
//!
//! When η̂ overshoots λ̂ (or is nonpositive) the Janardan fit is
//! abandoned for the Poisson-Poisson model with λ̂ = η̂ = x̄. The clock
//! rate is θ̂ = λ̂ / horizon. Maximum likelihood is deliberately out of
//! scope.
//!
//! The fit error is reported as the RMS gap between the observed
//! cumulative ratios and the expected-ratio path e^(θ̂ t (μ-1)), the
//! only error measure computable from the quantities the model defines.

use crate::branching::GenerationLaw;
use crate::error::{domain_err, Error, Result};
use crate::math::exp_m1_plus_x;
use crate::offspring::{g_threshold, Criticality, JanardanParams, DEFAULT_CLASSIFY_TOL};
use crate::pipeline::RatioSeries;

/// Which member of the family the calibration settled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Two-rate offspring law under the Poisson clock.
    JanardanPoisson,
    /// Poisson offspring under the Poisson clock (λ̂ = η̂ = x̄).
    PoissonPoisson,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelKind::JanardanPoisson => "JanardanPoisson",
            ModelKind::PoissonPoisson => "PoissonPoisson",
        };
        f.write_str(s)
    }
}

/// Why a fit fell back to the Poisson-Poisson model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FallbackReason {
    /// The moment equation produced η̂ > λ̂.
    EtaExceedsLambda,
    /// The moment equation produced η̂ ≤ 0.
    EtaNonPositive,
    /// Every ratio was below one, so λ̂ itself was degenerate.
    AllRatiosBelowOne,
}

impl std::fmt::Display for FallbackReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FallbackReason::EtaExceedsLambda => "eta-hat exceeded lambda-hat",
            FallbackReason::EtaNonPositive => "eta-hat was nonpositive",
            FallbackReason::AllRatiosBelowOne => "all ratios below one",
        };
        f.write_str(s)
    }
}

/// Calibration output.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub lambda_hat: f64,
    pub eta_hat: f64,
    /// Generation-clock rate per day, λ̂ / horizon.
    pub theta_hat: f64,
    pub mu: f64,
    pub sigma2: f64,
    /// Critical rate g(λ̂), reported for reference.
    pub g_value: f64,
    pub status: Criticality,
    pub model_kind: ModelKind,
    pub rmse: f64,
    /// Sample size (number of ratios).
    pub n: usize,
    /// Zero-class count: ratios strictly below one.
    pub f0: usize,
    /// Sample mean of the ratios.
    pub xbar: f64,
    /// Present when the Poisson-Poisson fallback was taken.
    pub fallback: Option<FallbackReason>,
    /// Horizon the clock rate was derived from, in days.
    pub horizon_days: f64,
}

impl FitResult {
    /// The fitted offspring law.
    pub fn params(&self) -> JanardanParams {
        JanardanParams::new(self.lambda_hat, self.eta_hat)
            .expect("fit keeps the rate pair inside the valid domain")
    }

    /// The fitted one-generation law with cached moments.
    pub fn law(&self) -> GenerationLaw {
        GenerationLaw::new(self.params())
    }

    /// Flat key-value text report, one `key = value` per line.
    pub fn to_kv_text(&self, ticker: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("ticker = {ticker}\n"));
        out.push_str(&format!("n = {}\n", self.n));
        out.push_str(&format!("f0 = {}\n", self.f0));
        out.push_str(&format!("xbar = {:.6}\n", self.xbar));
        out.push_str(&format!("lambda_hat = {:.6}\n", self.lambda_hat));
        out.push_str(&format!("eta_hat = {:.6}\n", self.eta_hat));
        out.push_str(&format!("theta_hat = {:.6}\n", self.theta_hat));
        out.push_str(&format!("horizon_days = {:.1}\n", self.horizon_days));
        out.push_str(&format!("mu = {:.6}\n", self.mu));
        out.push_str(&format!("sigma2 = {:.6}\n", self.sigma2));
        out.push_str(&format!("g = {:.6}\n", self.g_value));
        out.push_str(&format!("status = {}\n", self.status));
        out.push_str(&format!("model_kind = {}\n", self.model_kind));
        out.push_str(&format!("rmse = {:.6}\n", self.rmse));
        if let Some(reason) = self.fallback {
            out.push_str(&format!("fallback = {reason}\n"));
        }
        out
    }

    /// Header for the single-row summary CSV.
    pub fn csv_header() -> &'static str {
        "ticker,mu,sigma2,lambda,eta,theta,rmse,g,status"
    }

    /// Machine-readable single-row CSV in the summary-table column order.
    pub fn to_csv_row(&self, ticker: &str) -> String {
        format!(
            "{},{:.4},{:.4},{:.4},{:.4},{:.6},{:.4},{:.4},{}",
            ticker,
            self.mu,
            self.sigma2,
            self.lambda_hat,
            self.eta_hat,
            self.theta_hat,
            self.rmse,
            self.g_value,
            self.status
        )
    }
}

/// λ̂ = ln(n / f₀) from the zero-class frequency.
pub fn estimate_lambda(n: usize, f0: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    if f0 == 0 {
        return Err(Error::UnboundedRate { n });
    }
    if f0 >= n {
        return Err(Error::DegenerateRate { n });
    }
    Ok((n as f64 / f0 as f64).ln())
}

/// η̂ from the first-moment equation, given λ̂ and the sample mean.
///
/// May legitimately exceed λ̂ or drop to zero and below; the caller
/// decides the fallback. Numerator and denominator share the same
/// expression shape so x̄ = λ̂ returns exactly λ̂.
pub fn estimate_eta(lambda_hat: f64, xbar: f64) -> f64 {
    debug_assert!(lambda_hat > 0.0);
    let em = (-lambda_hat).exp();
    let num = xbar - 1.0 + em;
    let den = lambda_hat - 1.0 + em;
    if den.abs() < 1e-8 {
        // λ̂ - 1 + e^(-λ̂) cancels for small λ̂; rebuild it stably.
        return lambda_hat * num / exp_m1_plus_x(lambda_hat);
    }
    lambda_hat * num / den
}

/// Root-mean-square gap between observed ratios and the expected-ratio
/// path e^(θ t (μ-1)) at the given day indices.
pub fn rmse(theta_hat: f64, mu: f64, ratios: &[f64], times: &[f64]) -> Result<f64> {
    if ratios.is_empty() {
        return Err(Error::EmptySeries);
    }
    if ratios.len() != times.len() {
        return Err(Error::Alignment {
            ratios: ratios.len(),
            times: times.len(),
        });
    }
    let sum_sq: f64 = ratios
        .iter()
        .zip(times)
        .map(|(&xi, &t)| {
            let model = (theta_hat * t * (mu - 1.0)).exp();
            (xi - model) * (xi - model)
        })
        .sum();
    Ok((sum_sq / ratios.len() as f64).sqrt())
}

/// Full calibration from a ratio series.
///
/// Estimates λ̂ from the zero-class count and η̂ from the sample mean;
/// falls back to the Poisson-Poisson model when the moment equations
/// leave the valid domain. θ̂ = λ̂ / `horizon_days`. Classification uses
/// the default tolerance; see [`fit_with_classify_tol`].
pub fn fit(ratios: &RatioSeries, horizon_days: f64) -> Result<FitResult> {
    fit_with_classify_tol(ratios, horizon_days, DEFAULT_CLASSIFY_TOL)
}

/// [`fit`] with an explicit criticality tolerance on |μ - 1|.
pub fn fit_with_classify_tol(
    ratios: &RatioSeries,
    horizon_days: f64,
    classify_tol: f64,
) -> Result<FitResult> {
    if ratios.is_empty() {
        return Err(Error::EmptySeries);
    }
    if !horizon_days.is_finite() || horizon_days <= 0.0 {
        return domain_err(format!("horizon_days must be positive, got {horizon_days}"));
    }
    let n = ratios.len();
    let f0 = ratios.count_below_one();
    let xbar = ratios.mean();

    let (lambda_hat, eta_hat, model_kind, fallback) = if f0 == n {
        // All returns negative: λ̂ would sit at 0. The sample mean still
        // defines a usable subcritical Poisson model, so fall back
        // rather than erroring, and flag the condition.
        (xbar, xbar, ModelKind::PoissonPoisson, Some(FallbackReason::AllRatiosBelowOne))
    } else {
        let lambda = estimate_lambda(n, f0)?; // f0 == 0 errors here
        let eta = estimate_eta(lambda, xbar);
        if eta > lambda {
            (xbar, xbar, ModelKind::PoissonPoisson, Some(FallbackReason::EtaExceedsLambda))
        } else if eta <= 0.0 {
            (xbar, xbar, ModelKind::PoissonPoisson, Some(FallbackReason::EtaNonPositive))
        } else {
            (lambda, eta, ModelKind::JanardanPoisson, None)
        }
    };

    let params = JanardanParams::new(lambda_hat, eta_hat)?;
    let moments = params.moments();
    let report = params.classify(classify_tol);
    let theta_hat = lambda_hat / horizon_days;
    let times: Vec<f64> = ratios.day_index().iter().map(|&d| d as f64).collect();
    let rmse = rmse(theta_hat, moments.mu, ratios.ratios(), &times)?;

    Ok(FitResult {
        lambda_hat,
        eta_hat,
        theta_hat,
        mu: moments.mu,
        sigma2: moments.sigma2,
        g_value: g_threshold(lambda_hat)?,
        status: report.status,
        model_kind,
        rmse,
        n,
        f0,
        xbar,
        fallback,
        horizon_days,
    })
}
