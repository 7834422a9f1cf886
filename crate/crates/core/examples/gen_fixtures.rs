//! Regenerates the synthetic price fixtures under `fixtures/`.
//!
//! Each fixture is a 490-row `date,close` series spanning exactly 730
//! calendar days of weekday dates. The ratio paths are shaped so the
//! derived statistics (zero-class count, sample mean, final ratio) land
//! on the profile targets below, which in turn pin the fitted rates.
//!
//! Run with: `cargo run -p jgw-core --example gen_fixtures`

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use chrono::{Datelike, NaiveDate, Weekday};

use jgw_core::estimation::{fit, ModelKind};
use jgw_core::offspring::Criticality;
use jgw_core::pipeline::{cumulative_ratios, PriceSeries};

struct Profile {
    name: &'static str,
    base_close: f64,
    /// Number of ratios strictly below one.
    f0: usize,
    /// Target sample mean of the ratios.
    xbar: f64,
    /// Target final ratio.
    end: f64,
    expect_kind: ModelKind,
    expect_status: Criticality,
}

const N_RATIOS: usize = 489;

fn main() {
    let out_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    std::fs::create_dir_all(&out_dir).expect("create fixtures dir");
    let dates = trading_dates();
    assert_eq!(dates.len(), N_RATIOS + 1);
    assert_eq!(
        (*dates.last().unwrap() - dates[0]).num_days(),
        730,
        "span must be exactly 730 calendar days"
    );

    let profiles = [
        Profile {
            name: "dal",
            base_close: 58.0,
            f0: 340,
            xbar: 0.7575,
            end: 0.8392,
            expect_kind: ModelKind::PoissonPoisson,
            expect_status: Criticality::Subcritical,
        },
        Profile {
            name: "aapl",
            base_close: 48.0,
            f0: 35,
            xbar: 1.6907,
            end: 2.4125,
            expect_kind: ModelKind::JanardanPoisson,
            expect_status: Criticality::Supercritical,
        },
        Profile {
            name: "sq",
            base_close: 75.0,
            f0: 150,
            xbar: 1.4994,
            end: 2.978,
            expect_kind: ModelKind::PoissonPoisson,
            expect_status: Criticality::Supercritical,
        },
        Profile {
            name: "amzn",
            base_close: 89.0,
            f0: 123,
            xbar: 1.3104,
            end: 1.6675,
            expect_kind: ModelKind::JanardanPoisson,
            expect_status: Criticality::Supercritical,
        },
    ];

    for profile in &profiles {
        let ratios = build_ratios(profile);
        verify_raw(profile, &ratios);
        let path = out_dir.join(format!("{}.csv", profile.name));
        let csv = render_csv(&dates, profile.base_close, &ratios);
        std::fs::write(&path, csv).expect("write fixture");
        verify_written(profile, &path);
        println!("wrote {}", path.display());
    }
}

/// 490 weekday dates from 2019-04-01 to 2021-03-31 inclusive, with the
/// surplus weekdays dropped evenly (stand-ins for exchange holidays).
fn trading_dates() -> Vec<NaiveDate> {
    let start = NaiveDate::from_ymd_opt(2019, 4, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(2021, 3, 31).unwrap();
    let mut weekdays = Vec::new();
    let mut d = start;
    while d <= end {
        if d.weekday() != Weekday::Sat && d.weekday() != Weekday::Sun {
            weekdays.push(d);
        }
        d = d.succ_opt().unwrap();
    }
    let drops = weekdays.len() - (N_RATIOS + 1);
    let stride = weekdays.len() as f64 / (drops + 1) as f64;
    let drop_idx: Vec<usize> = (1..=drops).map(|k| (k as f64 * stride) as usize).collect();
    let kept: Vec<NaiveDate> = weekdays
        .iter()
        .enumerate()
        .filter(|(i, _)| !drop_idx.contains(i))
        .map(|(_, d)| *d)
        .collect();
    assert_eq!(kept[0], start);
    assert_eq!(*kept.last().unwrap(), end);
    kept
}

/// Dip values strictly below one: 0.997 - amp·sin(π i / (len+1)).
fn dip(len: usize, amp: f64) -> Vec<f64> {
    (1..=len)
        .map(|i| 0.997 - amp * (PI * i as f64 / (len + 1) as f64).sin())
        .collect()
}

/// Power-curve rise from 1.003 to `end`, exponent solved so the segment
/// sums to `target_sum`. A short-period mean-zero wiggle is layered over
/// whole periods only, so the sum and the final value stay exact.
fn power_rise(len: usize, end: f64, target_sum: f64, wiggle: f64) -> Vec<f64> {
    let base = 1.003;
    let shape_sum_needed = (target_sum - len as f64 * base) / (end - base);
    assert!(shape_sum_needed > 0.0 && shape_sum_needed < len as f64);
    let shape_sum = |p: f64| -> f64 {
        (1..=len)
            .map(|j| (j as f64 / len as f64).powf(p))
            .sum::<f64>()
    };
    // Σ (j/len)^p is strictly decreasing in p; bisect.
    let (mut lo, mut hi) = (0.05_f64, 20.0_f64);
    assert!(shape_sum(lo) > shape_sum_needed && shape_sum(hi) < shape_sum_needed);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shape_sum(mid) > shape_sum_needed {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let mut vals: Vec<f64> = (1..=len)
        .map(|j| base + (end - base) * (j as f64 / len as f64).powf(p))
        .collect();
    let periods = (len - 1) / 21;
    for (j, v) in vals.iter_mut().take(periods * 21).enumerate() {
        *v += wiggle * (2.0 * PI * (j + 1) as f64 / 21.0).sin();
    }
    vals
}

fn build_ratios(profile: &Profile) -> Vec<f64> {
    let total = N_RATIOS as f64 * profile.xbar;
    match profile.name {
        "dal" => {
            // Early rally above one, then a crash and a partial
            // recovery that stays below one through the end.
            let above_len = N_RATIOS - profile.f0; // 149
            let crash_len = 60;
            let recover_len = profile.f0 - crash_len; // 280
            let trough = 0.35;
            let mut below = Vec::with_capacity(profile.f0);
            for j in 1..=crash_len {
                let g = (1.0 - (PI * j as f64 / crash_len as f64).cos()) / 2.0;
                below.push(0.997 + (trough - 0.997) * g);
            }
            for j in 1..=recover_len {
                let g = (1.0 - (PI * j as f64 / recover_len as f64).cos()) / 2.0;
                below.push(trough + (profile.end - trough) * g);
            }
            // Mean-zero wiggle over whole periods, clear of the end.
            let periods = (recover_len - 28) / 21;
            for k in 0..periods * 21 {
                below[crash_len + k] += 0.0015 * (2.0 * PI * (k + 1) as f64 / 21.0).sin();
            }
            let below_sum: f64 = below.iter().sum();
            // Solve the rally amplitude for the exact total.
            let sin_sum: f64 = (1..=above_len)
                .map(|i| (PI * i as f64 / (above_len + 1) as f64).sin())
                .sum();
            let amp = (total - below_sum - above_len as f64 * 1.003) / sin_sum;
            assert!(amp > 0.0 && amp < 0.5, "rally amplitude {amp}");
            let mut ratios: Vec<f64> = (1..=above_len)
                .map(|i| 1.003 + amp * (PI * i as f64 / (above_len + 1) as f64).sin())
                .collect();
            ratios.extend(below);
            ratios
        }
        "aapl" => {
            let d = dip(profile.f0, 0.11);
            let dip_sum: f64 = d.iter().sum();
            let rise = power_rise(N_RATIOS - profile.f0, profile.end, total - dip_sum, 0.002);
            let mut ratios = d;
            ratios.extend(rise);
            ratios
        }
        "sq" => {
            let d = dip(profile.f0, 0.17);
            let dip_sum: f64 = d.iter().sum();
            let rise = power_rise(N_RATIOS - profile.f0, profile.end, total - dip_sum, 0.002);
            let mut ratios = d;
            ratios.extend(rise);
            ratios
        }
        "amzn" => {
            let d = dip(profile.f0, 0.09);
            let dip_sum: f64 = d.iter().sum();
            let rise = power_rise(N_RATIOS - profile.f0, profile.end, total - dip_sum, 0.0015);
            let mut ratios = d;
            ratios.extend(rise);
            ratios
        }
        other => panic!("unknown profile {other}"),
    }
}

fn verify_raw(profile: &Profile, ratios: &[f64]) {
    assert_eq!(ratios.len(), N_RATIOS);
    let below = ratios.iter().filter(|r| **r < 1.0).count();
    assert_eq!(below, profile.f0, "{}: zero-class count", profile.name);
    for r in ratios {
        assert!(
            (*r - 1.0).abs() > 5e-4,
            "{}: ratio {r} too close to 1 for safe rounding",
            profile.name
        );
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!(
        (mean - profile.xbar).abs() < 1e-9,
        "{}: mean {mean} vs {}",
        profile.name,
        profile.xbar
    );
    assert!((ratios.last().unwrap() - profile.end).abs() < 1e-9);
}

fn render_csv(dates: &[NaiveDate], base: f64, ratios: &[f64]) -> String {
    let mut out = String::from("date,close\n");
    let _ = writeln!(out, "{},{:.2}", dates[0], base);
    for (date, ratio) in dates[1..].iter().zip(ratios) {
        let _ = writeln!(out, "{},{:.2}", date, base * ratio);
    }
    out
}

fn verify_written(profile: &Profile, path: &std::path::Path) {
    let series = PriceSeries::from_csv_path(path).expect("reload fixture");
    assert_eq!(series.len(), N_RATIOS + 1);
    assert_eq!(series.calendar_span_days(), 730.0);
    let ratios = cumulative_ratios(&series);
    assert_eq!(ratios.count_below_one(), profile.f0, "{} after rounding", profile.name);
    let result = fit(&ratios, 730.0).expect("fit fixture");
    assert_eq!(result.model_kind, profile.expect_kind, "{}", profile.name);
    assert_eq!(result.status, profile.expect_status, "{}", profile.name);
    assert!(
        (result.xbar - profile.xbar).abs() < 5e-4,
        "{}: xbar {} vs {}",
        profile.name,
        result.xbar,
        profile.xbar
    );
    println!(
        "{}: lambda={:.4} eta={:.4} mu={:.4} status={} rmse={:.4}",
        profile.name, result.lambda_hat, result.eta_hat, result.mu, result.status, result.rmse
    );
}
