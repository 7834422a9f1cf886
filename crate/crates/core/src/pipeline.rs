//! Data ingestion and the end-to-end trend pipeline.
//!
//! From a `date,close` CSV the pipeline derives daily returns
//! r_i = X_i/X_{i-1} - 1 and cumulative ratios ξ_i = X_i/X₀, counts the
//! zero class f₀ = #{ξ_i < 1}, calibrates (λ̂, η̂, θ̂), classifies the
//! trend by criticality (supercritical ⇒ up-trend, subcritical ⇒
//! down-trend), and evaluates forecasts and curves at the requested
//! times.
//!
//! Two time scales coexist deliberately: trading-day indices drive the
//! forecast times t, while the calendar span of the input drives the
//! clock rate θ̂ = λ̂ / span. Missing dates (weekends, holidays) are not
//! imputed.

use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use chrono::NaiveDate;

use crate::branching::{DEFAULT_FIXED_POINT_TOL, DEFAULT_MAX_ITER};
use crate::error::{domain_err, Error, Result};
use crate::estimation::{fit_with_classify_tol, FitResult};
use crate::offspring::Criticality;
use crate::subordinated::{
    expected_ratio, expected_return_curve, extinction_curve, prob_zero, ratio_variance,
    CurveTable, SubordinationParams, DEFAULT_TAIL_TOL,
};

/// Ingested close prices: strictly increasing dates, positive closes,
/// at least two rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    ticker: String,
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
}

impl PriceSeries {
    /// Parse a `date,close` CSV with ISO-8601 dates.
    ///
    /// Errors carry the offending 1-based line number. Rows must arrive
    /// sorted; duplicate dates and non-positive closes are rejected.
    pub fn from_csv_reader(reader: impl BufRead, ticker: &str) -> Result<Self> {
        let mut dates: Vec<NaiveDate> = Vec::new();
        let mut closes: Vec<f64> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if idx == 0 {
                if trimmed.trim_start_matches('\u{feff}') != "date,close" {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("expected header `date,close`, got `{trimmed}`"),
                    });
                }
                continue;
            }
            if trimmed.is_empty() {
                continue;
            }
            let (date_str, close_str) = trimmed.split_once(',').ok_or(Error::Parse {
                line: lineno,
                msg: "expected two comma-separated fields".into(),
            })?;
            let date = NaiveDate::parse_from_str(date_str.trim(), "%Y-%m-%d").map_err(|e| {
                Error::Parse {
                    line: lineno,
                    msg: format!("bad date `{}`: {e}", date_str.trim()),
                }
            })?;
            let close: f64 = close_str.trim().parse().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("bad close `{}`: {e}", close_str.trim()),
            })?;
            if !close.is_finite() || close <= 0.0 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("close must be positive, got {close}"),
                });
            }
            if let Some(&prev) = dates.last() {
                if date == prev {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("duplicate date {date}"),
                    });
                }
                if date < prev {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("dates out of order: {date} after {prev}"),
                    });
                }
            }
            dates.push(date);
            closes.push(close);
        }
        if dates.len() < 2 {
            return Err(Error::EmptySeries);
        }
        Ok(Self {
            ticker: ticker.to_string(),
            dates,
            closes,
        })
    }

    /// Load from a file path; the ticker label defaults to the file stem.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let ticker = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_uppercase())
            .unwrap_or_else(|| "SERIES".into());
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file), &ticker)
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn set_ticker(&mut self, ticker: &str) {
        self.ticker = ticker.to_string();
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    /// Calendar days between the first and last row.
    pub fn calendar_span_days(&self) -> f64 {
        (*self.dates.last().unwrap() - self.dates[0]).num_days() as f64
    }
}

/// Daily returns r_i = X_i/X_{i-1} - 1, one per row after the first.
pub fn daily_returns(prices: &PriceSeries) -> Vec<f64> {
    prices
        .closes
        .windows(2)
        .map(|w| w[1] / w[0] - 1.0)
        .collect()
}

/// Cumulative ratios ξ_i = X_i/X₀ indexed by trading-day offset.
pub fn cumulative_ratios(prices: &PriceSeries) -> RatioSeries {
    let x0 = prices.closes[0];
    let ratios: Vec<f64> = prices.closes[1..].iter().map(|&x| x / x0).collect();
    let day_index: Vec<u32> = (1..=ratios.len() as u32).collect();
    RatioSeries { ratios, day_index }
}

/// Positive cumulative ratios with their trading-day offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSeries {
    ratios: Vec<f64>,
    day_index: Vec<u32>,
}

impl RatioSeries {
    pub fn new(ratios: Vec<f64>, day_index: Vec<u32>) -> Result<Self> {
        if ratios.len() != day_index.len() {
            return Err(Error::Alignment {
                ratios: ratios.len(),
                times: day_index.len(),
            });
        }
        if let Some(r) = ratios.iter().find(|r| !r.is_finite() || **r <= 0.0) {
            return domain_err(format!("ratios must be positive and finite, got {r}"));
        }
        if day_index.windows(2).any(|w| w[1] <= w[0]) {
            return domain_err("day indices must be strictly increasing");
        }
        Ok(Self { ratios, day_index })
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn day_index(&self) -> &[u32] {
        &self.day_index
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.ratios.iter().sum::<f64>() / self.ratios.len() as f64
    }

    /// Zero-class count: ratios strictly below one (ties survive).
    pub fn count_below_one(&self) -> usize {
        self.ratios.iter().filter(|r| **r < 1.0).count()
    }

    /// Observed ratio at a trading-day offset, if the data covers it.
    pub fn at_day(&self, day: u32) -> Option<f64> {
        self.day_index
            .iter()
            .position(|&d| d == day)
            .map(|i| self.ratios[i])
    }

    /// Total-return series ξ_i - 1 over the trading-day axis.
    pub fn total_return_curve(&self) -> CurveTable {
        let points: Vec<(f64, f64)> = self
            .day_index
            .iter()
            .zip(&self.ratios)
            .map(|(&d, &xi)| (d as f64, xi - 1.0))
            .collect();
        CurveTable::new(points).expect("day indices are strictly increasing")
    }
}

/// Pipeline settings; every field has a reproducible default.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Clock horizon in days; defaults to the calendar span of the input.
    pub horizon_days: Option<f64>,
    /// Generation offset of the zero-probability series.
    pub offset: u8,
    /// Ancestor weight X₀ for variance forecasts.
    pub x0: f64,
    /// Tolerance on |μ-1| for criticality classification.
    pub classify_tol: f64,
    /// Fixed-point tolerance for the ultimate extinction probability.
    pub fixed_point_tol: f64,
    /// Fixed-point iteration budget.
    pub max_iter: u64,
    /// Poisson tail mass at which the zero-probability series stops.
    pub tail_tol: f64,
    /// Trading-day times for the forecast table.
    pub forecast_times: Vec<f64>,
    /// Curve grid upper end, in days.
    pub curve_t_max: f64,
    /// Curve grid step, in days.
    pub curve_step: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            horizon_days: None,
            offset: 1,
            x0: 1.0,
            classify_tol: crate::offspring::DEFAULT_CLASSIFY_TOL,
            fixed_point_tol: DEFAULT_FIXED_POINT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            tail_tol: DEFAULT_TAIL_TOL,
            forecast_times: vec![90.0, 180.0, 365.0, 489.0],
            curve_t_max: 500.0,
            curve_step: 5.0,
        }
    }
}

impl PipelineConfig {
    /// Apply one `key=value` pair; unknown keys are rejected.
    pub fn apply_key_value(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let parse_f64 = |v: &str| -> Result<f64> {
            v.trim().parse().map_err(|e| Error::Parse {
                line,
                msg: format!("bad number `{v}`: {e}"),
            })
        };
        match key.trim() {
            "horizon_days" => self.horizon_days = Some(parse_f64(value)?),
            "offset" => {
                self.offset = value.trim().parse().map_err(|e| Error::Parse {
                    line,
                    msg: format!("bad offset `{value}`: {e}"),
                })?
            }
            "x0" => self.x0 = parse_f64(value)?,
            "classify_tol" => self.classify_tol = parse_f64(value)?,
            "fixed_point_tol" => self.fixed_point_tol = parse_f64(value)?,
            "max_iter" => {
                self.max_iter = value.trim().parse().map_err(|e| Error::Parse {
                    line,
                    msg: format!("bad max_iter `{value}`: {e}"),
                })?
            }
            "tail_tol" => self.tail_tol = parse_f64(value)?,
            "forecast_times" => {
                let mut times = Vec::new();
                for part in value.split(',') {
                    times.push(parse_f64(part)?);
                }
                self.forecast_times = times;
            }
            "curve_t_max" => self.curve_t_max = parse_f64(value)?,
            "curve_step" => self.curve_step = parse_f64(value)?,
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown config key `{other}`"),
                })
            }
        }
        Ok(())
    }

    /// Parse a plain `key=value` config file (`#` starts a comment).
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or(Error::Parse {
                line,
                msg: format!("expected key=value, got `{stripped}`"),
            })?;
            self.apply_key_value(key, value, line)?;
        }
        Ok(())
    }

    fn curve_grid(&self) -> Vec<f64> {
        let mut grid = Vec::new();
        let mut t = 0.0;
        while t <= self.curve_t_max + 1e-9 {
            grid.push(t);
            t += self.curve_step;
        }
        grid
    }
}

/// One row of the forecast table.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRow {
    /// Trading-day time.
    pub t: f64,
    pub expected_ratio: f64,
    pub variance: f64,
    pub prob_zero: f64,
    /// Observed ratio at that trading day, when the data covers it.
    pub actual: Option<f64>,
}

/// Everything the trend run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    pub ticker: String,
    pub fit: FitResult,
    /// Horizon actually used for θ̂, in days.
    pub horizon_days: f64,
    /// Number of trading days covered by the ratio series.
    pub trading_days: u32,
    /// Ultimate extinction probability of the fitted law: exactly 1 for
    /// subcritical/critical fits (no iteration run), the fixed point
    /// otherwise.
    pub eventual_extinction: f64,
    pub forecasts: Vec<ForecastRow>,
    /// Observed total return ξ_i - 1 over trading days.
    pub total_return_curve: CurveTable,
    /// Model expected total return over the configured grid.
    pub expected_return_curve: CurveTable,
    /// Model extinction probability over the configured grid.
    pub extinction_curve: CurveTable,
}

impl TrendReport {
    /// Human-readable block, deterministic formatting.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let trend = match self.fit.status {
            Criticality::Supercritical => "up-trend",
            Criticality::Subcritical => "down-trend",
            Criticality::Critical => "flat",
        };
        let _ = writeln!(out, "ticker: {}", self.ticker);
        let _ = writeln!(
            out,
            "observations: {} ratios over {} trading days ({} calendar days)",
            self.fit.n, self.trading_days, self.horizon_days
        );
        let _ = writeln!(
            out,
            "model: {} (lambda={:.4}, eta={:.4}, theta={:.6}/day)",
            self.fit.model_kind, self.fit.lambda_hat, self.fit.eta_hat, self.fit.theta_hat
        );
        let _ = writeln!(
            out,
            "offspring moments: mu={:.4} sigma2={:.4} g(lambda)={:.4}",
            self.fit.mu, self.fit.sigma2, self.fit.g_value
        );
        let _ = writeln!(out, "status: {} ({trend})", self.fit.status);
        let _ = writeln!(out, "rmse: {:.4}", self.fit.rmse);
        if let Some(reason) = self.fit.fallback {
            let _ = writeln!(out, "fallback: {reason}");
        }
        let _ = writeln!(out, "eventual extinction: {:.6}", self.eventual_extinction);
        let _ = writeln!(out, "forecasts:");
        let _ = writeln!(out, "  {:>6}  {:>10}  {:>10}  {:>10}  {:>10}", "t", "E(P)", "Var(P)", "Pr(P=0)", "actual");
        for row in &self.forecasts {
            let actual = row
                .actual
                .map(|a| format!("{a:.4}"))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "  {:>6}  {:>10.4}  {:>10.4}  {:>10.4}  {:>10}",
                row.t, row.expected_ratio, row.variance, row.prob_zero, actual
            );
        }
        out
    }

    /// Header of the forecast CSV.
    pub fn forecast_csv_header() -> &'static str {
        "ticker,t,expected_ratio,variance,prob_zero,actual"
    }

    /// Forecast rows as CSV (no header).
    pub fn forecast_csv_rows(&self) -> String {
        let mut out = String::new();
        for row in &self.forecasts {
            let actual = row.actual.map(|a| format!("{a:.4}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{:.4},{:.4},{:.4},{actual}",
                self.ticker, row.t, row.expected_ratio, row.variance, row.prob_zero
            );
        }
        out
    }
}

/// Run the whole trend pipeline on a price series.
///
/// Steps: returns and ratios → zero-class count and sample mean →
/// (λ̂, η̂, g) → θ̂ from the horizon → moments and forecasts →
/// criticality status → extinction (series when the fit is not
/// subcritical, q = 1 directly otherwise) → curves.
pub fn run_trend_algorithm(prices: &PriceSeries, config: &PipelineConfig) -> Result<TrendReport> {
    let ratios = cumulative_ratios(prices);
    let horizon = config
        .horizon_days
        .unwrap_or_else(|| prices.calendar_span_days());
    let fit = fit_with_classify_tol(&ratios, horizon, config.classify_tol)?;
    let law = fit.law();
    let sub = SubordinationParams::new(fit.theta_hat, horizon, config.x0, config.offset)?;

    let eventual_extinction = if fit.status == Criticality::Supercritical {
        law.extinction_probability(config.fixed_point_tol, config.max_iter)?
    } else {
        1.0
    };

    let mut forecasts = Vec::with_capacity(config.forecast_times.len());
    for &t in &config.forecast_times {
        forecasts.push(ForecastRow {
            t,
            expected_ratio: expected_ratio(&law, &sub, t),
            variance: ratio_variance(&law, &sub, t),
            prob_zero: prob_zero(&law, &sub, t, config.tail_tol)?,
            actual: if t >= 0.0 && t.fract() == 0.0 {
                ratios.at_day(t as u32)
            } else {
                None
            },
        });
    }

    let grid = config.curve_grid();
    Ok(TrendReport {
        ticker: prices.ticker().to_string(),
        fit,
        horizon_days: horizon,
        trading_days: *ratios.day_index().last().unwrap_or(&0),
        eventual_extinction,
        forecasts,
        total_return_curve: ratios.total_return_curve(),
        expected_return_curve: expected_return_curve(&law, &sub, &grid)?,
        extinction_curve: extinction_curve(&law, &sub, &grid)?,
    })
}

/// Combined fit-summary CSV over several reports.
pub fn render_table1_csv(reports: &[TrendReport]) -> String {
    let mut out = String::from(FitResult::csv_header());
    out.push('\n');
    for r in reports {
        out.push_str(&r.fit.to_csv_row(&r.ticker));
        out.push('\n');
    }
    out
}

/// Combined forecast CSV over several reports.
pub fn render_table2_csv(reports: &[TrendReport]) -> String {
    let mut out = String::from(TrendReport::forecast_csv_header());
    out.push('\n');
    for r in reports {
        out.push_str(&r.forecast_csv_rows());
    }
    out
}
