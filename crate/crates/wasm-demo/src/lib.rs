//! Wasm bindings for the browser demo.
//!
//! Three interactive operations, each returning a JSON string so the
//! page stays a single static file with hand-written glue:
//!
//! - [`classify_params`]: moments, threshold rate, criticality, and the
//!   ultimate extinction probability for a rate pair;
//! - [`curve_data`]: expected-return and extinction curves over a day
//!   grid under the clocked ratio process;
//! - [`pmf_vs_sample`]: analytic offspring pmf next to an empirical
//!   histogram drawn from the event-time sampler.
//!
//! The JSON-building functions are plain Rust and unit-tested on the
//! host; only the thin `#[wasm_bindgen]` wrappers touch `JsValue`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use jgw_core::branching::{GenerationLaw, DEFAULT_FIXED_POINT_TOL, DEFAULT_MAX_ITER};
use jgw_core::mc::{sample_offspring, PathRng};
use jgw_core::offspring::{g_threshold, JanardanParams, DEFAULT_CLASSIFY_TOL};
use jgw_core::subordinated::{
    expected_return_curve, extinction_curve, SubordinationParams, MAX_CURVE_TIME,
};

#[derive(Serialize)]
struct ClassifyOut {
    lambda: f64,
    eta: f64,
    mu: f64,
    sigma2: f64,
    g: f64,
    status: String,
    extinction: f64,
}

#[derive(Serialize)]
struct CurvesOut {
    t: Vec<f64>,
    expected_return: Vec<f64>,
    extinction: Vec<f64>,
}

#[derive(Serialize)]
struct PmfOut {
    m: Vec<u32>,
    analytic: Vec<f64>,
    empirical: Vec<f64>,
}

fn params(lambda: f64, eta: f64) -> Result<JanardanParams, String> {
    JanardanParams::new(lambda, eta).map_err(|e| e.to_string())
}

pub fn classify_json(lambda: f64, eta: f64) -> Result<String, String> {
    let p = params(lambda, eta)?;
    let report = p.classify(DEFAULT_CLASSIFY_TOL);
    let law = GenerationLaw::new(p);
    let extinction = law
        .extinction_probability(DEFAULT_FIXED_POINT_TOL, DEFAULT_MAX_ITER)
        .map_err(|e| e.to_string())?;
    let out = ClassifyOut {
        lambda,
        eta,
        mu: report.mu,
        sigma2: p.variance(),
        g: g_threshold(lambda).map_err(|e| e.to_string())?,
        status: report.status.to_string(),
        extinction,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

pub fn curves_json(
    lambda: f64,
    eta: f64,
    horizon_days: f64,
    t_max: f64,
    n_points: u32,
) -> Result<String, String> {
    let p = params(lambda, eta)?;
    if !(horizon_days.is_finite() && horizon_days > 0.0) {
        return Err(format!("horizon must be positive, got {horizon_days}"));
    }
    if !(t_max.is_finite() && t_max > 0.0 && t_max <= MAX_CURVE_TIME) {
        return Err(format!("t_max must lie in (0, {MAX_CURVE_TIME}], got {t_max}"));
    }
    let n_points = n_points.clamp(2, 2000);
    let law = GenerationLaw::new(p);
    let sub = SubordinationParams::new(lambda / horizon_days, t_max, 1.0, 1)
        .map_err(|e| e.to_string())?;
    let grid: Vec<f64> = (0..n_points)
        .map(|i| t_max * i as f64 / (n_points - 1) as f64)
        .collect();
    let ret = expected_return_curve(&law, &sub, &grid).map_err(|e| e.to_string())?;
    let ext = extinction_curve(&law, &sub, &grid).map_err(|e| e.to_string())?;
    let out = CurvesOut {
        t: grid,
        expected_return: ret.points().iter().map(|(_, v)| *v).collect(),
        extinction: ext.points().iter().map(|(_, v)| *v).collect(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

pub fn pmf_json(
    lambda: f64,
    eta: f64,
    t: f64,
    max_m: u32,
    n_samples: u32,
    seed: u64,
) -> Result<String, String> {
    let p = params(lambda, eta)?;
    if !(t.is_finite() && t > 0.0 && t <= 50.0) {
        return Err(format!("t must lie in (0, 50], got {t}"));
    }
    let max_m = max_m.clamp(1, 60);
    let n_samples = n_samples.clamp(100, 2_000_000);
    let mut counts = vec![0u64; max_m as usize + 1];
    for path in 0..n_samples as u64 {
        let mut rng = PathRng::from_seed_and_path(seed, path);
        let x = sample_offspring(&p, t, &mut rng) as usize;
        if x <= max_m as usize {
            counts[x] += 1;
        }
    }
    let mut out = PmfOut {
        m: Vec::new(),
        analytic: Vec::new(),
        empirical: Vec::new(),
    };
    for m in 0..=max_m {
        out.m.push(m);
        out.analytic.push(p.pmf(m as u64, t).map_err(|e| e.to_string())?);
        out.empirical
            .push(counts[m as usize] as f64 / n_samples as f64);
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn classify_params(lambda: f64, eta: f64) -> Result<String, JsValue> {
    classify_json(lambda, eta).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn curve_data(
    lambda: f64,
    eta: f64,
    horizon_days: f64,
    t_max: f64,
    n_points: u32,
) -> Result<String, JsValue> {
    curves_json(lambda, eta, horizon_days, t_max, n_points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn pmf_vs_sample(
    lambda: f64,
    eta: f64,
    t: f64,
    max_m: u32,
    n_samples: u32,
    seed: u64,
) -> Result<String, JsValue> {
    pmf_json(lambda, eta, t, max_m, n_samples, seed).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn classify_reports_supercritical_rates() {
        let v: Value = serde_json::from_str(&classify_json(2.637, 1.1765).unwrap()).unwrap();
        assert_eq!(v["status"], "Supercritical");
        assert!((v["mu"].as_f64().unwrap() - 1.6907).abs() < 5e-4);
        assert!((v["g"].as_f64().unwrap() - 0.1105).abs() < 5e-4);
        assert!((v["extinction"].as_f64().unwrap() - 0.1356).abs() < 1e-3);
    }

    #[test]
    fn classify_subcritical_is_certain_extinction() {
        let v: Value = serde_json::from_str(&classify_json(0.7575, 0.7575).unwrap()).unwrap();
        assert_eq!(v["status"], "Subcritical");
        assert_eq!(v["extinction"].as_f64().unwrap(), 1.0);
    }

    #[test]
    fn classify_rejects_bad_rates() {
        assert!(classify_json(-1.0, 0.5).is_err());
        assert!(classify_json(1.0, 1.5).is_err());
    }

    #[test]
    fn curves_are_aligned_and_anchored() {
        let v: Value =
            serde_json::from_str(&curves_json(0.7575, 0.7575, 730.0, 500.0, 101).unwrap())
                .unwrap();
        let t = v["t"].as_array().unwrap();
        let ret = v["expected_return"].as_array().unwrap();
        let ext = v["extinction"].as_array().unwrap();
        assert_eq!(t.len(), 101);
        assert_eq!(ret.len(), 101);
        assert_eq!(ext.len(), 101);
        assert_eq!(ret[0].as_f64().unwrap(), 0.0);
        let last_ext = ext.last().unwrap().as_f64().unwrap();
        assert!((last_ext - 0.60).abs() < 0.05, "got {last_ext}");
    }

    #[test]
    fn pmf_histogram_tracks_the_analytic_law() {
        let v: Value =
            serde_json::from_str(&pmf_json(2.637, 1.1765, 1.0, 12, 200_000, 5).unwrap()).unwrap();
        let analytic = v["analytic"].as_array().unwrap();
        let empirical = v["empirical"].as_array().unwrap();
        assert_eq!(analytic.len(), 13);
        for (a, e) in analytic.iter().zip(empirical) {
            let gap = (a.as_f64().unwrap() - e.as_f64().unwrap()).abs();
            assert!(gap < 0.01, "gap {gap}");
        }
    }
}
