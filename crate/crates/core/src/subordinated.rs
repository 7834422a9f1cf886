//! The price-ratio process P(t) = X(t)/X₀ under a Poisson generation clock.
//!
//! A Poisson process N(t) with rate θ per day counts how many
//! generations have elapsed by calendar/trading time t, independent of
//! the branching itself. Evaluating the chain at the random generation
//! count gives
//!
//! ```text
//! E(P(t))   = e^(θt(μ-1))
//! Var(P(t)) = (σ²/(X₀ μ(μ-1))) (e^(θt(μ²-1)) - e^(θt(μ-1)))
//!             + e^(θt(μ²-1)) - e^(2θt(μ-1))          if μ ≠ 1
//!           = σ²θt / X₀                              if μ = 1
//! Pr(P(t)=0) = Σ_n Π_{n+offset}(0) · Pr(N(t) = n)
//! ```
//!
//! The zero-probability series carries an explicit generation offset.
//! With offset 1 the first clock tick corresponds to the first
//! generation; that convention reproduces the published extinction
//! figures, while the moment formulas above are the unshifted ones.
//! Both are kept exactly as stated rather than harmonized.

use crate::branching::{GenerationLaw, CRITICAL_BRANCH_TOL};
use crate::error::{domain_err, Result};
use crate::math::ln_factorial;

/// Default Poisson tail mass at which the zero-probability series is
/// truncated; the truncation error is bounded by this mass.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Largest time (in days) accepted on curve grids.
pub const MAX_CURVE_TIME: f64 = 1e4;

/// Generation-clock parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubordinationParams {
    theta: f64,
    horizon_t: f64,
    x0: f64,
    offset: u8,
}

impl SubordinationParams {
    /// Validate and build: θ > 0, horizon ≥ 0, X₀ > 0, offset ∈ {0, 1}.
    pub fn new(theta: f64, horizon_t: f64, x0: f64, offset: u8) -> Result<Self> {
        if !theta.is_finite() || theta <= 0.0 {
            return domain_err(format!("clock rate theta must be positive, got {theta}"));
        }
        if !horizon_t.is_finite() || horizon_t < 0.0 {
            return domain_err(format!("horizon must be nonnegative, got {horizon_t}"));
        }
        if !x0.is_finite() || x0 <= 0.0 {
            return domain_err(format!("ancestor weight x0 must be positive, got {x0}"));
        }
        if offset > 1 {
            return domain_err(format!("generation offset must be 0 or 1, got {offset}"));
        }
        Ok(Self {
            theta,
            horizon_t,
            x0,
            offset,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn horizon_t(&self) -> f64 {
        self.horizon_t
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn offset(&self) -> u8 {
        self.offset
    }
}

/// Sampled (t, value) pairs ready for plotting or CSV export.
///
/// Times are strictly increasing and every value is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    points: Vec<(f64, f64)>,
}

impl CurveTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return domain_err(format!(
                    "curve times must be strictly increasing, got {} after {}",
                    w[1].0, w[0].0
                ));
            }
        }
        if let Some((t, v)) = points.iter().find(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return domain_err(format!("curve contains a non-finite point ({t}, {v})"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Two-column CSV with a one-line header, the plot-ready format.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (t, v) in &self.points {
            out.push_str(&format!("{t},{v}\n"));
        }
        out
    }
}

/// E(P(t)) = e^(θt(μ-1)). Expected total return is this minus 1.
pub fn expected_ratio(law: &GenerationLaw, sub: &SubordinationParams, t: f64) -> f64 {
    (sub.theta * t * (law.mu() - 1.0)).exp()
}

/// Var(P(t)) with the critical branch selected on |μ - 1|.
pub fn ratio_variance(law: &GenerationLaw, sub: &SubordinationParams, t: f64) -> f64 {
    let mu = law.mu();
    let s2 = law.sigma2();
    let th = sub.theta * t;
    if (mu - 1.0).abs() < CRITICAL_BRANCH_TOL {
        return s2 * th / sub.x0;
    }
    let e_sq = (th * (mu * mu - 1.0)).exp();
    let e_mu = (th * (mu - 1.0)).exp();
    (s2 / (sub.x0 * mu * (mu - 1.0))) * (e_sq - e_mu) + (e_sq - e_mu * e_mu)
}

/// Pr(P(t) = 0): the Poisson mixture of extinction iterates.
///
/// Truncated once the remaining Poisson tail mass drops below
/// `tail_tol`; since every Π_k(0) ≤ 1 the truncation error is bounded
/// by that mass. Nondecreasing in t and bounded by the ultimate
/// extinction probability.
pub fn prob_zero(
    law: &GenerationLaw,
    sub: &SubordinationParams,
    t: f64,
    tail_tol: f64,
) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return domain_err(format!("time t={t} must be finite and nonnegative"));
    }
    if tail_tol.is_nan() || tail_tol <= 0.0 {
        return domain_err(format!("tail_tol must be positive, got {tail_tol}"));
    }
    let mean = sub.theta * t;
    // v tracks Π_{n+offset}(0) as n advances.
    let mut v = law.iterate_pgf(sub.offset as u32, 0.0);
    if mean == 0.0 {
        return Ok(v);
    }

    if mean <= 30.0 {
        // Direct recurrence over the Poisson weights.
        let mut w = (-mean).exp();
        let mut covered = w;
        let mut acc = v * w;
        let mut n = 1u64;
        while 1.0 - covered >= tail_tol && n < 100_000 {
            v = law.pgf(v);
            w *= mean / n as f64;
            covered += w;
            acc += v * w;
            n += 1;
        }
        return Ok(acc.min(1.0));
    }

    // Large clock mean: the weights around n ≈ mean are representable
    // but e^(-mean) is not, so work through log weights over a window
    // wide enough that the excluded mass is far below tail_tol.
    let half = (12.0 * mean.sqrt() + 30.0) as u64;
    let center = mean as u64;
    let lo = center.saturating_sub(half);
    let hi = center + half;
    let ln_mean = mean.ln();
    let mut acc = 0.0_f64;
    let mut v = law.iterate_pgf(sub.offset as u32 + lo as u32, 0.0);
    for n in lo..=hi {
        if n > lo {
            v = law.pgf(v);
        }
        let w = (n as f64 * ln_mean - mean - ln_factorial(n)).exp();
        acc += v * w;
    }
    Ok(acc.min(1.0))
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    for w in t_grid.windows(2) {
        if w[1] <= w[0] {
            return domain_err(format!(
                "time grid must be strictly increasing, got {} after {}",
                w[1], w[0]
            ));
        }
    }
    if let Some(t) = t_grid
        .iter()
        .find(|t| !t.is_finite() || **t < 0.0 || **t > MAX_CURVE_TIME)
    {
        return domain_err(format!("grid time {t} outside [0, {MAX_CURVE_TIME}] days"));
    }
    Ok(())
}

/// Expected total return E(P(t)) - 1 sampled over a time grid.
pub fn expected_return_curve(
    law: &GenerationLaw,
    sub: &SubordinationParams,
    t_grid: &[f64],
) -> Result<CurveTable> {
    validate_grid(t_grid)?;
    let points = t_grid
        .iter()
        .map(|&t| (t, expected_ratio(law, sub, t) - 1.0))
        .collect();
    CurveTable::new(points)
}

/// Pr(P(t) = 0) sampled over a time grid; values are nondecreasing.
pub fn extinction_curve(
    law: &GenerationLaw,
    sub: &SubordinationParams,
    t_grid: &[f64],
) -> Result<CurveTable> {
    validate_grid(t_grid)?;
    let mut points = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        points.push((t, prob_zero(law, sub, t, DEFAULT_TAIL_TOL)?));
    }
    CurveTable::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::{DEFAULT_FIXED_POINT_TOL, DEFAULT_MAX_ITER};
    use crate::offspring::JanardanParams;

    fn law(lambda: f64, eta: f64) -> GenerationLaw {
        GenerationLaw::new(JanardanParams::new(lambda, eta).unwrap())
    }

    fn sub(theta: f64, x0: f64, offset: u8) -> SubordinationParams {
        SubordinationParams::new(theta, 0.0, x0, offset).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(SubordinationParams::new(0.0, 1.0, 1.0, 0).is_err());
        assert!(SubordinationParams::new(0.1, -1.0, 1.0, 0).is_err());
        assert!(SubordinationParams::new(0.1, 1.0, 0.0, 0).is_err());
        assert!(SubordinationParams::new(0.1, 1.0, 1.0, 2).is_err());
        assert!(SubordinationParams::new(0.1, 1.0, 1.0, 1).is_ok());
    }

    #[test]
    fn expected_ratio_at_zero_time_is_one() {
        let l = law(2.637, 1.1765);
        assert_eq!(expected_ratio(&l, &sub(0.0036, 1.0, 1), 0.0), 1.0);
    }

    #[test]
    fn expected_ratio_reproduces_table_anchors() {
        // DAL: Poisson 0.7575, θ = λ/730, t = 489.
        let dal = law(0.7575, 0.7575);
        let v = expected_ratio(&dal, &sub(0.7575 / 730.0, 1.0, 1), 489.0);
        assert!((v - 0.8842).abs() < 1e-4, "got {v}");
        // AMZN: (1.3802, 1.2278), θ = λ/730, t = 489.
        let amzn = law(1.3802, 1.2278);
        let v = expected_ratio(&amzn, &sub(1.3802 / 730.0, 1.0, 1), 489.0);
        assert!((v - 1.3324).abs() < 1e-4, "got {v}");
    }

    #[test]
    fn ratio_variance_critical_branch() {
        // μ = 1 exactly: σ²θt/x0 = 2·0.01·50 = 1.
        let l = 1.5;
        let g = crate::offspring::g_threshold(l).unwrap();
        let critical = law(l, g);
        let s = sub(0.01, 1.0, 0);
        let v = ratio_variance(&critical, &s, 50.0);
        assert!((v - critical.sigma2() * 0.5).abs() < 1e-12);
    }

    #[test]
    fn ratio_variance_plug_in_values() {
        // AAPL at x0 = 1, t = 489, cross-checked by Monte Carlo in the
        // acceptance suite.
        let aapl = law(2.637, 1.1765);
        let v = ratio_variance(&aapl, &sub(2.637 / 730.0, 1.0, 1), 489.0);
        assert!((v - 36.31).abs() < 0.05, "got {v}");
        // DAL with the ancestor weight set to a realistic initial close.
        let dal = law(0.7575, 0.7575);
        let v = ratio_variance(&dal, &sub(0.7575 / 730.0, 58.0, 1), 489.0);
        assert!((v - 0.0293).abs() < 5e-4, "got {v}");
    }

    #[test]
    fn prob_zero_trivial_time_zero() {
        let l = law(2.637, 1.1765);
        assert_eq!(prob_zero(&l, &sub(0.01, 1.0, 0), 0.0, 1e-10).unwrap(), 0.0);
        // offset 1 at t = 0 is the one-generation extinction mass e^(-λ).
        let v = prob_zero(&l, &sub(0.01, 1.0, 1), 0.0, 1e-10).unwrap();
        assert!((v - (-2.637_f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn prob_zero_rejects_negative_time() {
        let l = law(1.0, 0.5);
        assert!(prob_zero(&l, &sub(0.01, 1.0, 1), -1.0, 1e-10).is_err());
    }

    #[test]
    fn prob_zero_reproduces_table_anchors() {
        let cases: &[(f64, f64, f64, f64)] = &[
            // (lambda, eta, t, expected)
            (0.7575, 0.7575, 489.0, 0.5596),
            (1.4994, 1.4994, 90.0, 0.2389),
            (2.637, 1.1765, 489.0, 0.1091),
            (1.3802, 1.2278, 489.0, 0.3359),
        ];
        for &(la, et, t, expect) in cases {
            let l = law(la, et);
            let s = sub(la / 730.0, 1.0, 1);
            let v = prob_zero(&l, &s, t, 1e-10).unwrap();
            assert!((v - expect).abs() < 1e-3, "({la},{et}) t={t}: got {v}");
        }
    }

    #[test]
    fn prob_zero_nondecreasing_and_bounded_by_extinction() {
        for &(la, et) in &[(2.637, 1.1765), (1.4994, 1.4994), (0.7575, 0.7575)] {
            let l = law(la, et);
            let q = l
                .extinction_probability(DEFAULT_FIXED_POINT_TOL, DEFAULT_MAX_ITER)
                .unwrap();
            for offset in [0u8, 1] {
                let s = sub(la / 730.0, 1.0, offset);
                let mut prev = -1.0;
                for &t in &[0.0, 30.0, 90.0, 180.0, 365.0, 489.0, 1000.0, 5000.0] {
                    let v = prob_zero(&l, &s, t, 1e-10).unwrap();
                    assert!(v >= prev - 1e-12, "offset {offset} t {t}");
                    assert!(v <= q + 1e-9, "offset {offset} t {t}: {v} > {q}");
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn prob_zero_long_run_limit_is_extinction_probability() {
        // Exercises the large-mean window path: θt ≈ 361.
        for &(la, et) in &[(2.637, 1.1765), (1.4994, 1.4994), (0.7575, 0.7575)] {
            let l = law(la, et);
            let q = l
                .extinction_probability(DEFAULT_FIXED_POINT_TOL, DEFAULT_MAX_ITER)
                .unwrap();
            let s = sub(la / 730.0, 1.0, 0);
            let v = prob_zero(&l, &s, 1e5, 1e-10).unwrap();
            assert!((v - q).abs() < 1e-3, "({la},{et}): {v} vs q={q}");
        }
    }

    #[test]
    fn prob_zero_truncation_is_stable_in_tail_tol() {
        let l = law(2.637, 1.1765);
        let s = sub(2.637 / 730.0, 1.0, 1);
        let coarse = prob_zero(&l, &s, 489.0, 1e-6).unwrap();
        let fine = prob_zero(&l, &s, 489.0, 1e-12).unwrap();
        assert!((coarse - fine).abs() < 1e-6);
    }

    #[test]
    fn curves_pointwise_and_shapes() {
        let dal = law(0.7575, 0.7575);
        let s = sub(0.7575 / 730.0, 1.0, 1);
        // Trivial grid.
        let c = expected_return_curve(&dal, &s, &[0.0]).unwrap();
        assert_eq!(c.points(), &[(0.0, 0.0)]);
        // Published claim: DAL extinction ≈ 60% by day 500.
        let c = extinction_curve(&dal, &s, &[500.0]).unwrap();
        let (_, v) = c.points()[0];
        assert!((v - 0.60).abs() < 0.05, "got {v}");
        // Extinction curve is nondecreasing on a full grid.
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 5.0).collect();
        let c = extinction_curve(&dal, &s, &grid).unwrap();
        for w in c.points().windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12);
        }
    }

    #[test]
    fn amzn_extinction_grid_values() {
        let amzn = law(1.3802, 1.2278);
        let s = sub(1.3802 / 730.0, 1.0, 1);
        let c = extinction_curve(&amzn, &s, &[90.0, 180.0, 365.0, 489.0]).unwrap();
        let expect = [0.2697, 0.2866, 0.3176, 0.3359];
        for ((_, v), e) in c.points().iter().zip(expect) {
            assert!((v - e).abs() < 1e-3, "{v} vs {e}");
        }
    }

    #[test]
    fn grid_validation_rejects_bad_input() {
        let l = law(1.0, 0.5);
        let s = sub(0.01, 1.0, 1);
        assert!(expected_return_curve(&l, &s, &[1.0, 1.0]).is_err());
        assert!(expected_return_curve(&l, &s, &[2.0, 1.0]).is_err());
        assert!(expected_return_curve(&l, &s, &[0.0, 1e5]).is_err());
        assert!(extinction_curve(&l, &s, &[-1.0, 1.0]).is_err());
    }

    #[test]
    fn curve_table_rules_and_csv() {
        assert!(CurveTable::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(CurveTable::new(vec![(0.0, f64::NAN)]).is_err());
        let c = CurveTable::new(vec![(0.0, 0.0), (5.0, 0.25)]).unwrap();
        assert_eq!(c.to_csv(), "t,value\n0,0\n5,0.25\n");
    }
}
