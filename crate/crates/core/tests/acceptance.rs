//! Acceptance suite: the exit criteria of the artifact, one test per
//! criterion, each printing one PASS/FAIL line per check.
//!
//! Run with `cargo test -p jgw-core --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use std::path::PathBuf;

use jgw_core::branching::{GenerationLaw, DEFAULT_FIXED_POINT_TOL, DEFAULT_MAX_ITER};
use jgw_core::estimation::rmse;
use jgw_core::mc::{sample_offspring, simulate_generations, simulate_subordinated, PathRng, SimConfig};
use jgw_core::offspring::{g_threshold, Criticality, JanardanParams};
use jgw_core::pipeline::{
    render_table1_csv, render_table2_csv, run_trend_algorithm, PipelineConfig, PriceSeries,
    TrendReport,
};
use jgw_core::subordinated::{expected_ratio, prob_zero, ratio_variance, SubordinationParams};

/// Reference rate pairs: (ticker, λ, η).
const TICKERS: [(&str, f64, f64); 4] = [
    ("DAL", 0.7575, 0.7575),
    ("AAPL", 2.637, 1.1765),
    ("SQ", 1.4994, 1.4994),
    ("AMZN", 1.3802, 1.2278),
];

const FORECAST_DAYS: [f64; 4] = [90.0, 180.0, 365.0, 489.0];

struct Checker {
    criterion: &'static str,
    failures: Vec<String>,
}

impl Checker {
    fn new(criterion: &'static str) -> Self {
        Self {
            criterion,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        let ok = (got - want).abs() <= tol;
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!(
            "{verdict} [{}] {name}: got {got:.6}, want {want:.6} ± {tol:e}",
            self.criterion
        );
        if !ok {
            self.failures
                .push(format!("{name}: got {got}, want {want} ± {tol}"));
        }
    }

    fn check_bool(&mut self, name: &str, ok: bool, detail: &str) {
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} [{}] {name}: {detail}", self.criterion);
        if !ok {
            self.failures.push(format!("{name}: {detail}"));
        }
    }

    fn finish(self) {
        assert!(
            self.failures.is_empty(),
            "[{}] {} check(s) failed:\n{}",
            self.criterion,
            self.failures.len(),
            self.failures.join("\n")
        );
    }
}

fn law(lambda: f64, eta: f64) -> GenerationLaw {
    GenerationLaw::new(JanardanParams::new(lambda, eta).unwrap())
}

fn fixture(name: &str) -> PriceSeries {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../fixtures/{name}.csv"));
    PriceSeries::from_csv_path(path).expect("fixture present and well-formed")
}

#[test]
fn criterion_1_moment_reproduction() {
    let mut c = Checker::new("1 moments");
    let aapl = JanardanParams::new(2.637, 1.1765).unwrap();
    c.check("AAPL mu", aapl.mean(), 1.6907, 5e-4);
    c.check("AAPL sigma2", aapl.variance(), 1.0607, 5e-4);
    c.check("AAPL g", g_threshold(2.637).unwrap(), 0.1105, 5e-4);
    let amzn = JanardanParams::new(1.3802, 1.2278).unwrap();
    c.check("AMZN mu", amzn.mean(), 1.3104, 5e-4);
    c.check("AMZN sigma2", amzn.variance(), 1.2248, 5e-4);
    c.check("AMZN g", g_threshold(1.3802).unwrap(), 0.5496, 5e-4);
    c.check("DAL g", g_threshold(0.7575).unwrap(), 1.5692, 5e-4);
    c.check("SQ g", g_threshold(1.4994).unwrap(), 0.4632, 5e-4);
    c.finish();
}

#[test]
fn criterion_2_expected_ratio_reproduction() {
    let expected: [(&str, [f64; 4]); 4] = [
        ("DAL", [0.9776, 0.9557, 0.9122, 0.8842]),
        ("AAPL", [1.2518, 1.5669, 2.4861, 3.3875]),
        ("SQ", [1.0967, 1.2028, 1.4541, 1.6513]),
        ("AMZN", [1.0542, 1.1114, 1.2389, 1.3324]),
    ];
    let mut c = Checker::new("2 expected ratio");
    for ((ticker, lambda, eta), (_, refs)) in TICKERS.iter().zip(expected.iter()) {
        let l = law(*lambda, *eta);
        let sub = SubordinationParams::new(lambda / 730.0, 730.0, 1.0, 1).unwrap();
        for (t, want) in FORECAST_DAYS.iter().zip(refs) {
            c.check(
                &format!("{ticker} E(P({t}))"),
                expected_ratio(&l, &sub, *t),
                *want,
                2e-3,
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_3_extinction_series_reproduction() {
    let expected: [(&str, [f64; 4]); 4] = [
        ("DAL", [0.4871, 0.5047, 0.5385, 0.5596]),
        ("AAPL", [0.0812, 0.0894, 0.1025, 0.1091]),
        ("SQ", [0.2389, 0.2533, 0.2789, 0.2936]),
        ("AMZN", [0.2697, 0.2866, 0.3176, 0.3359]),
    ];
    let mut c = Checker::new("3 extinction series");
    for ((ticker, lambda, eta), (_, refs)) in TICKERS.iter().zip(expected.iter()) {
        let l = law(*lambda, *eta);
        let sub = SubordinationParams::new(lambda / 730.0, 730.0, 1.0, 1).unwrap();
        for (t, want) in FORECAST_DAYS.iter().zip(refs) {
            c.check(
                &format!("{ticker} Pr(P({t})=0)"),
                prob_zero(&l, &sub, *t, 1e-10).unwrap(),
                *want,
                1.5e-3,
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_4_variance_by_property_and_rmse_examples() {
    let mut c = Checker::new("4 substitutes");
    // (a) Analytic Var(P(t)) at x0 = 1 against Monte Carlo within
    // 3 standard errors of the sample variance. The moment formulas use
    // the unshifted clock, so the simulation runs offset 0.
    let config = SimConfig {
        n_paths: 100_000,
        seed: 424_242,
        ..Default::default()
    };
    for (ticker, lambda, eta) in TICKERS {
        let l = law(lambda, eta);
        let sub = SubordinationParams::new(lambda / 730.0, 730.0, 1.0, 0).unwrap();
        for t in [90.0, 489.0] {
            let sample = simulate_subordinated(&l, &sub, t, &config).unwrap();
            let se_mean = sample.mean_standard_error();
            c.check(
                &format!("{ticker} E(P({t})) vs MC (3 se = {:.4})", 3.0 * se_mean),
                sample.mean(),
                expected_ratio(&l, &sub, t),
                3.0 * se_mean,
            );
            let se_var = sample.variance_standard_error();
            c.check(
                &format!("{ticker} Var(P({t})) vs MC (3 se = {:.4})", 3.0 * se_var),
                sample.variance(),
                ratio_variance(&l, &sub, t),
                3.0 * se_var,
            );
        }
    }
    // (b) The rmse definition satisfies its pinned examples exactly.
    let theta = 0.01;
    let path: Vec<f64> = [1.0, 2.0, 3.0]
        .iter()
        .map(|&t| (theta * t * 0.5f64).exp())
        .collect();
    c.check(
        "rmse perfect path",
        rmse(theta, 1.5, &path, &[1.0, 2.0, 3.0]).unwrap(),
        0.0,
        1e-12,
    );
    c.check(
        "rmse hand example",
        rmse(1.1f64.ln(), 2.0, &[1.0, 1.21], &[1.0, 2.0]).unwrap(),
        (0.01f64 / 2.0).sqrt(),
        1e-12,
    );
    c.check(
        "rmse critical flat",
        rmse(0.3, 1.0, &[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap(),
        0.0,
        1e-12,
    );
    c.finish();
}

#[test]
fn criterion_5_oracle_equivalence() {
    let mut c = Checker::new("5 oracle");
    let pairs = [(1.0, 0.5), (2.637, 1.1765), (1.5, 1.5)];
    for (lambda, eta) in pairs {
        let params = JanardanParams::new(lambda, eta).unwrap();
        // Empirical pmf from 10^6 event-time samples.
        let n = 1_000_000u64;
        let mut counts: Vec<u64> = Vec::new();
        for path in 0..n {
            let mut rng = PathRng::from_seed_and_path(777, path);
            let x = sample_offspring(&params, 1.0, &mut rng) as usize;
            if counts.len() <= x {
                counts.resize(x + 1, 0);
            }
            counts[x] += 1;
        }
        // Total-variation distance against the analytic pmf: half the
        // L1 gap over the observed support plus the analytic tail.
        let mut l1 = 0.0f64;
        let mut analytic_mass = 0.0f64;
        for (m, &cnt) in counts.iter().enumerate() {
            let p = params.pmf(m as u64, 1.0).unwrap();
            analytic_mass += p;
            l1 += (cnt as f64 / n as f64 - p).abs();
        }
        let tv = 0.5 * (l1 + (1.0 - analytic_mass).max(0.0));
        c.check_bool(
            &format!("TV(empirical, pmf) at ({lambda}, {eta})"),
            tv < 3e-3,
            &format!("tv = {tv:.5} < 0.003"),
        );

        // Extinct-tree fraction after three generations.
        let law = GenerationLaw::new(params);
        let config = SimConfig {
            n_paths: 100_000,
            seed: 909,
            ..Default::default()
        };
        let sample = simulate_generations(&law, 3, &config).unwrap();
        let extinct = sample.iter().filter(|&&x| x == 0).count() as f64 / sample.len() as f64;
        let p3 = law.iterate_pgf(3, 0.0);
        let se = (p3 * (1.0 - p3) / sample.len() as f64).sqrt();
        c.check(
            &format!("extinct 3-gen fraction at ({lambda}, {eta}) (3 se = {:.4})", 3.0 * se),
            extinct,
            p3,
            3.0 * se,
        );
    }
    c.finish();
}

#[test]
fn criterion_6_root_correctness() {
    let mut c = Checker::new("6 extinction root");
    let sq = law(1.4994, 1.4994);
    let q = sq
        .extinction_probability(DEFAULT_FIXED_POINT_TOL, DEFAULT_MAX_ITER)
        .unwrap();
    // Brute-force bisection oracle on Π(s) - s.
    let f = |s: f64| sq.pgf(s) - s;
    let (mut lo, mut hi) = (0.0f64, 1.0 - 1e-9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    c.check("q(Poisson 1.4994) vs bisection", q, oracle, 1e-3);
    c.check("q(Poisson 1.4994) anchor", q, 0.4177, 1e-3);
    c.check_bool(
        "fixed-point residual",
        (sq.pgf(q) - q).abs() < 1e-11,
        &format!("|Π(q)-q| = {:.2e} < 1e-11", (sq.pgf(q) - q).abs()),
    );
    for (name, l) in [("DAL", law(0.7575, 0.7575)), ("half", law(0.5, 0.25))] {
        let q = l
            .extinction_probability(DEFAULT_FIXED_POINT_TOL, DEFAULT_MAX_ITER)
            .unwrap();
        c.check_bool(
            &format!("subcritical {name} returns exactly 1"),
            q == 1.0,
            &format!("q = {q}"),
        );
    }
    c.finish();
}

#[test]
fn criterion_7_limit_sandwich() {
    let mut c = Checker::new("7 limits");
    for lambda in [0.5, 1.0, 2.637] {
        let near_poisson = JanardanParams::new(lambda, lambda * (1.0 - 1e-10)).unwrap();
        let near_bernoulli = JanardanParams::new(lambda, lambda * 1e-12).unwrap();
        let mut worst_p = 0.0f64;
        let mut worst_b = 0.0f64;
        for i in 0..=20 {
            let s = i as f64 / 20.0;
            let poisson = (-lambda * (1.0 - s)).exp();
            let bernoulli = (-lambda).exp() + s * (1.0 - (-lambda).exp());
            worst_p = worst_p.max((near_poisson.pgf(s, 1.0).unwrap() - poisson).abs());
            worst_b = worst_b.max((near_bernoulli.pgf(s, 1.0).unwrap() - bernoulli).abs());
        }
        c.check_bool(
            &format!("Poisson limit at λ={lambda}"),
            worst_p < 1e-9,
            &format!("max gap {worst_p:.2e} < 1e-9"),
        );
        c.check_bool(
            &format!("Bernoulli limit at λ={lambda}"),
            worst_b < 1e-6,
            &format!("max gap {worst_b:.2e} < 1e-6"),
        );
    }
    c.finish();
}

#[test]
fn criterion_8_pipeline_end_to_end() {
    let mut c = Checker::new("8 pipeline");
    let expect_status = [
        ("dal", Criticality::Subcritical),
        ("aapl", Criticality::Supercritical),
        ("sq", Criticality::Supercritical),
        ("amzn", Criticality::Supercritical),
    ];
    let config = PipelineConfig::default();
    let mut reports: Vec<TrendReport> = Vec::new();
    for (name, want) in expect_status {
        let prices = fixture(name);
        let report = run_trend_algorithm(&prices, &config).unwrap();
        c.check_bool(
            &format!("{name} status"),
            report.fit.status == want,
            &format!("{} (want {want:?})", report.fit.status),
        );
        reports.push(report);
    }
    // Fixture-driven forecasts land on the published anchors.
    let aapl = &reports[1];
    c.check("aapl fixture E(P(489))", aapl.forecasts[3].expected_ratio, 3.3875, 0.01);
    c.check("aapl fixture Pr(P(489)=0)", aapl.forecasts[3].prob_zero, 0.1091, 2e-3);
    let dal = &reports[0];
    c.check("dal fixture Pr(P(489)=0)", dal.forecasts[3].prob_zero, 0.5596, 2e-3);
    c.check_bool(
        "dal certain eventual extinction",
        dal.eventual_extinction == 1.0,
        &format!("q = {}", dal.eventual_extinction),
    );

    // Deterministic combined tables with the expected shapes.
    let table1 = render_table1_csv(&reports);
    let table2 = render_table2_csv(&reports);
    let reports_again: Vec<TrendReport> = expect_status
        .iter()
        .map(|(name, _)| run_trend_algorithm(&fixture(name), &config).unwrap())
        .collect();
    c.check_bool(
        "table1 deterministic",
        table1 == render_table1_csv(&reports_again),
        "byte-identical on rerun",
    );
    c.check_bool(
        "table2 deterministic",
        table2 == render_table2_csv(&reports_again),
        "byte-identical on rerun",
    );
    c.check_bool(
        "table1 shape",
        table1.lines().count() == 5
            && table1.starts_with("ticker,mu,sigma2,lambda,eta,theta,rmse,g,status"),
        "header + one row per ticker",
    );
    c.check_bool(
        "table2 shape",
        table2.lines().count() == 17
            && table2.starts_with("ticker,t,expected_ratio,variance,prob_zero,actual"),
        "header + four rows per ticker",
    );
    c.check_bool(
        "table1 DAL row",
        table1.lines().nth(1).is_some_and(|l| l.starts_with("DAL,") && l.ends_with("Subcritical")),
        table1.lines().nth(1).unwrap_or(""),
    );
    c.finish();
}
