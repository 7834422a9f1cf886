//! Property tests for the structural invariants of the model.

use proptest::prelude::*;

use jgw_core::branching::GenerationLaw;
use jgw_core::estimation::{fit, ModelKind};
use jgw_core::offspring::JanardanParams;
use jgw_core::pipeline::{cumulative_ratios, daily_returns, PriceSeries, RatioSeries};

fn rate_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.05f64..8.0, 0.01f64..=1.0).prop_map(|(l, frac)| (l, l * frac))
}

proptest! {
    /// Π(·, t) is a pgf: nondecreasing and convex on [0, 1], pinned at
    /// Π(0) = e^(-tλ) and Π(1) = 1.
    #[test]
    fn pgf_is_monotone_convex_and_pinned(
        (lambda, eta) in rate_pair(),
        t in 0.1f64..3.0,
        s1 in 0.0f64..=1.0,
        s2 in 0.0f64..=1.0,
    ) {
        let p = JanardanParams::new(lambda, eta).unwrap();
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let f_lo = p.pgf(lo, t).unwrap();
        let f_hi = p.pgf(hi, t).unwrap();
        prop_assert!(f_lo <= f_hi + 1e-12);
        let mid = 0.5 * (lo + hi);
        let f_mid = p.pgf(mid, t).unwrap();
        prop_assert!(f_mid <= 0.5 * (f_lo + f_hi) + 1e-12);
        prop_assert!((p.pgf(1.0, t).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((p.pgf(0.0, t).unwrap() - (-t * lambda).exp()).abs() < 1e-12);
    }

    /// The offspring mean is strictly increasing in η at fixed λ, with
    /// the Bernoulli and Poisson limits as bounds.
    #[test]
    fn mean_strictly_increasing_in_eta(
        lambda in 0.05f64..8.0,
        frac1 in 0.01f64..0.97,
        gap in 0.02f64..=0.5,
    ) {
        let frac2 = (frac1 + gap).min(1.0);
        let a = JanardanParams::new(lambda, lambda * frac1).unwrap();
        let b = JanardanParams::new(lambda, lambda * frac2).unwrap();
        prop_assert!(a.mean() < b.mean());
        prop_assert!(a.mean() > 1.0 - (-lambda).exp() - 1e-12);
        prop_assert!(b.mean() <= lambda + 1e-12);
    }

    /// Total probability: the pmf over all counts sums to one.
    #[test]
    fn pmf_total_probability(
        (lambda, eta) in rate_pair(),
        t in 0.2f64..2.5,
    ) {
        let p = JanardanParams::new(lambda, eta).unwrap();
        let mut sum = 0.0;
        for m in 0..500u64 {
            sum += p.pmf(m, t).unwrap();
            if 1.0 - sum < 1e-13 {
                break;
            }
        }
        prop_assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
    }

    /// Π_{a+b} = Π_a ∘ Π_b.
    #[test]
    fn iterated_pgf_semigroup(
        (lambda, eta) in rate_pair(),
        a in 0u32..8,
        b in 0u32..8,
        s in 0.0f64..=1.0,
    ) {
        let law = GenerationLaw::new(JanardanParams::new(lambda, eta).unwrap());
        let whole = law.iterate_pgf(a + b, s);
        let split = law.iterate_pgf(a, law.iterate_pgf(b, s));
        prop_assert!((whole - split).abs() < 1e-12);
    }

    /// Cumulative ratios from direct quotients equal the running
    /// product of (1 + r_i).
    #[test]
    fn ratio_product_identity(closes in prop::collection::vec(1.0f64..500.0, 2..50)) {
        let mut csv = String::from("date,close\n");
        for (i, c) in closes.iter().enumerate() {
            // Spread over consecutive days within a 3-month window.
            let day = i as u32;
            csv.push_str(&format!("2020-{:02}-{:02},{c}\n", 1 + day / 28, 1 + day % 28));
        }
        let series = PriceSeries::from_csv_reader(std::io::Cursor::new(csv), "X").unwrap();
        let ratios = cumulative_ratios(&series);
        let returns = daily_returns(&series);
        let mut product = 1.0f64;
        for (xi, r) in ratios.ratios().iter().zip(returns) {
            product *= 1.0 + r;
            prop_assert!((xi - product).abs() <= 1e-12 * product.max(1.0));
        }
    }

    /// Whenever the fit lands on the Poisson-Poisson model, its
    /// parameters collapse onto the sample mean exactly.
    #[test]
    fn poisson_fallback_collapses_to_sample_mean(
        values in prop::collection::vec(0.05f64..0.999, 3..200),
    ) {
        let n = values.len() as u32;
        let series = RatioSeries::new(values, (1..=n).collect()).unwrap();
        let result = fit(&series, 730.0).unwrap();
        prop_assert_eq!(result.model_kind, ModelKind::PoissonPoisson);
        prop_assert_eq!(result.lambda_hat, result.xbar);
        prop_assert_eq!(result.eta_hat, result.xbar);
        prop_assert_eq!(result.mu, result.xbar);
        prop_assert_eq!(result.sigma2, result.xbar);
    }
}
