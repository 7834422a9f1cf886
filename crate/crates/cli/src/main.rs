//! `jgw`: fit, classify, forecast, and simulate the branching-process
//! price model from the command line.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error (ingestion/IO),
//! 4 numeric error (domain, degenerate estimate, convergence, cap).
//! Every failure prints a single machine-greppable line starting with
//! `error[usage]:`, `error[data]:` or `error[numeric]:`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jgw_core::branching::GenerationLaw;
use jgw_core::estimation::FitResult;
use jgw_core::mc::{simulate_generations, simulate_subordinated, SimConfig, SubordinatedSample};
use jgw_core::offspring::JanardanParams;
use jgw_core::pipeline::{
    render_table1_csv, render_table2_csv, run_trend_algorithm, PipelineConfig, PriceSeries,
    TrendReport,
};
use jgw_core::subordinated::{
    expected_ratio, expected_return_curve, extinction_curve, prob_zero, ratio_variance,
    SubordinationParams,
};
use jgw_core::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "jgw",
    version,
    about = "Branching-process trend analysis for daily close prices",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate (lambda, eta, theta) from a date,close CSV.
    Fit(FitArgs),
    /// Full pipeline: fit, classify the trend, forecast, emit curves.
    Trend(TrendArgs),
    /// Expected-return and extinction curves from a CSV or raw rates.
    Curves(CurvesArgs),
    /// Forecast table rows at chosen trading-day times from raw rates.
    Forecast(ForecastArgs),
    /// Monte Carlo simulation of the offspring or ratio process.
    Simulate(SimulateArgs),
    /// Combined fit and forecast tables over several CSV inputs.
    Report(ReportArgs),
}

#[derive(Args)]
struct OutDirArg {
    /// Directory for output files.
    #[arg(long, env = "JGW_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RateArgs {
    /// First-offspring rate λ.
    #[arg(long, visible_alias = "first-rate")]
    lambda: f64,
    /// Subsequent-offspring rate η (0 < η ≤ λ).
    #[arg(long, visible_alias = "subsequent-rate")]
    eta: f64,
}

#[derive(Args)]
struct ClockArgs {
    /// Generation-clock rate θ per day.
    #[arg(long, visible_alias = "clock-rate")]
    theta: Option<f64>,
    /// Derive θ = λ / horizon from a horizon in days.
    #[arg(long, visible_alias = "theta-from-horizon")]
    horizon_days: Option<f64>,
}

#[derive(Args)]
struct FitArgs {
    /// Input date,close CSV.
    #[arg(long)]
    input: PathBuf,
    /// Clock horizon in days (default: calendar span of the input).
    #[arg(long)]
    horizon_days: Option<f64>,
    /// Ticker label (default: input file stem).
    #[arg(long)]
    ticker: Option<String>,
    /// key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    out: OutDirArg,
}

#[derive(Args)]
struct TrendArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    horizon_days: Option<f64>,
    #[arg(long)]
    ticker: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Generation offset of the extinction series (0 or 1).
    #[arg(long)]
    offset: Option<u8>,
    /// Forecast times in trading days, comma separated.
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    /// Ancestor weight X0 for variance forecasts.
    #[arg(long)]
    x0: Option<f64>,
    /// Curve grid upper end in days.
    #[arg(long)]
    curve_t_max: Option<f64>,
    /// Curve grid step in days.
    #[arg(long)]
    curve_step: Option<f64>,
    #[command(flatten)]
    out: OutDirArg,
}

#[derive(Args)]
struct CurvesArgs {
    /// Fit the rates from this CSV instead of passing them directly.
    #[arg(long, conflicts_with_all = ["lambda", "eta"])]
    input: Option<PathBuf>,
    #[arg(long, requires = "eta")]
    lambda: Option<f64>,
    #[arg(long, requires = "lambda")]
    eta: Option<f64>,
    #[command(flatten)]
    clock: ClockArgs,
    /// Curve grid upper end in days.
    #[arg(long, default_value_t = 500.0)]
    t_max: f64,
    /// Curve grid step in days.
    #[arg(long, default_value_t = 5.0)]
    step: f64,
    #[arg(long, default_value_t = 1)]
    offset: u8,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    /// Label used in output file names.
    #[arg(long)]
    label: Option<String>,
    #[command(flatten)]
    out: OutDirArg,
}

#[derive(Args)]
struct ForecastArgs {
    #[command(flatten)]
    rates: RateArgs,
    #[command(flatten)]
    clock: ClockArgs,
    /// Forecast times in trading days, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "90,180,365,489")]
    t: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = 1)]
    offset: u8,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    rates: RateArgs,
    /// Simulate fixed generation counts instead of the clocked process.
    #[arg(long, conflicts_with = "t")]
    generations: Option<u32>,
    /// Trading-day time for the clocked ratio process.
    #[arg(long)]
    t: Option<f64>,
    #[command(flatten)]
    clock: ClockArgs,
    #[arg(long, default_value_t = 100_000)]
    n_paths: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10_000_000)]
    max_population: u64,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = 1)]
    offset: u8,
    /// Dump the raw per-path samples to a single-column CSV.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Input CSVs, one per ticker (repeatable).
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    horizon_days: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    out: OutDirArg,
}

enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(_)
            | CoreError::Parse { .. }
            | CoreError::EmptySeries
            | CoreError::Alignment { .. } => CliError::Data(e.to_string()),
            CoreError::Domain(_)
            | CoreError::UnboundedRate { .. }
            | CoreError::DegenerateRate { .. }
            | CoreError::Convergence { .. }
            | CoreError::PopulationCap { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("error[usage]: {}", e.kind());
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error[usage]: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error[data]: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("error[numeric]: {msg}");
            ExitCode::from(4)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Trend(args) => cmd_trend(args),
        Command::Curves(args) => cmd_curves(args),
        Command::Forecast(args) => cmd_forecast(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Report(args) => cmd_report(args),
    }
}

/// Write every output file only after all of them rendered; a failure
/// on any file removes the partial set.
fn write_outputs(out_dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut written: Vec<PathBuf> = Vec::new();
    for (name, content) in files {
        let path = out_dir.join(name);
        if let Err(e) = std::fs::write(&path, content) {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            let _ = std::fs::remove_file(&path);
            return Err(CliError::Data(format!("cannot write {}: {e}", path.display())));
        }
        written.push(path);
    }
    Ok(())
}

fn load_config(path: Option<&PathBuf>) -> Result<PipelineConfig, CliError> {
    let mut config = PipelineConfig::default();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        config.apply_config_text(&text)?;
    }
    Ok(config)
}

fn load_series(path: &Path, ticker: Option<&str>) -> Result<PriceSeries, CliError> {
    let mut series = PriceSeries::from_csv_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if let Some(t) = ticker {
        series.set_ticker(t);
    }
    Ok(series)
}

fn build_params(lambda: f64, eta: f64) -> Result<JanardanParams, CliError> {
    JanardanParams::new(lambda, eta).map_err(CliError::from)
}

impl ClockArgs {
    fn resolve(&self, lambda: f64) -> Result<f64, CliError> {
        match (self.theta, self.horizon_days) {
            (Some(theta), None) => Ok(theta),
            (None, Some(h)) if h > 0.0 => Ok(lambda / h),
            (None, Some(h)) => Err(CliError::Usage(format!(
                "--horizon-days must be positive, got {h}"
            ))),
            (Some(_), Some(_)) => Err(CliError::Usage(
                "pass either --theta or --horizon-days, not both".into(),
            )),
            (None, None) => Err(CliError::Usage(
                "a clock rate is required: --theta or --horizon-days".into(),
            )),
        }
    }
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let series = load_series(&args.input, args.ticker.as_deref())?;
    let mut config = load_config(args.config.as_ref())?;
    if args.horizon_days.is_some() {
        config.horizon_days = args.horizon_days;
    }
    let horizon = config
        .horizon_days
        .unwrap_or_else(|| series.calendar_span_days());
    let ratios = jgw_core::pipeline::cumulative_ratios(&series);
    let fit = jgw_core::estimation::fit(&ratios, horizon)?;
    let ticker = series.ticker().to_string();

    let text = fit.to_kv_text(&ticker);
    let mut csv = String::from(FitResult::csv_header());
    csv.push('\n');
    csv.push_str(&fit.to_csv_row(&ticker));
    csv.push('\n');
    let stem = ticker.to_lowercase();
    write_outputs(
        &args.out.out_dir,
        &[
            (format!("{stem}_fit.txt"), text.clone()),
            (format!("{stem}_fit.csv"), csv),
        ],
    )?;
    print!("{text}");
    Ok(())
}

fn apply_trend_overrides(config: &mut PipelineConfig, args: &TrendArgs) {
    if args.horizon_days.is_some() {
        config.horizon_days = args.horizon_days;
    }
    if let Some(offset) = args.offset {
        config.offset = offset;
    }
    if let Some(times) = &args.t {
        config.forecast_times = times.clone();
    }
    if let Some(x0) = args.x0 {
        config.x0 = x0;
    }
    if let Some(v) = args.curve_t_max {
        config.curve_t_max = v;
    }
    if let Some(v) = args.curve_step {
        config.curve_step = v;
    }
}

fn cmd_trend(args: TrendArgs) -> Result<(), CliError> {
    let series = load_series(&args.input, args.ticker.as_deref())?;
    let mut config = load_config(args.config.as_ref())?;
    apply_trend_overrides(&mut config, &args);
    let report = run_trend_algorithm(&series, &config)?;

    let stem = report.ticker.to_lowercase();
    let text = report.to_text();
    let mut forecast_csv = String::from(TrendReport::forecast_csv_header());
    forecast_csv.push('\n');
    forecast_csv.push_str(&report.forecast_csv_rows());
    write_outputs(
        &args.out.out_dir,
        &[
            (format!("{stem}_trend.txt"), text.clone()),
            (format!("{stem}_forecast.csv"), forecast_csv),
            (format!("{stem}_total_return.csv"), report.total_return_curve.to_csv()),
            (format!("{stem}_expected_return.csv"), report.expected_return_curve.to_csv()),
            (format!("{stem}_extinction.csv"), report.extinction_curve.to_csv()),
        ],
    )?;
    print!("{text}");
    Ok(())
}

fn cmd_curves(args: CurvesArgs) -> Result<(), CliError> {
    let (params, theta, label) = if let Some(input) = &args.input {
        let series = load_series(input, None)?;
        let horizon = args
            .clock
            .horizon_days
            .unwrap_or_else(|| series.calendar_span_days());
        let ratios = jgw_core::pipeline::cumulative_ratios(&series);
        let fit = jgw_core::estimation::fit(&ratios, horizon)?;
        let theta = match args.clock.theta {
            Some(t) => t,
            None => fit.theta_hat,
        };
        let label = args
            .label
            .clone()
            .unwrap_or_else(|| series.ticker().to_lowercase());
        (fit.params(), theta, label)
    } else {
        let (lambda, eta) = match (args.lambda, args.eta) {
            (Some(l), Some(e)) => (l, e),
            _ => {
                return Err(CliError::Usage(
                    "pass --input, or both --lambda and --eta".into(),
                ))
            }
        };
        let params = build_params(lambda, eta)?;
        let theta = args.clock.resolve(lambda)?;
        (params, theta, args.label.clone().unwrap_or_else(|| "params".into()))
    };

    if args.step <= 0.0 {
        return Err(CliError::Usage(format!(
            "--step must be positive, got {}",
            args.step
        )));
    }
    let law = GenerationLaw::new(params);
    let sub = SubordinationParams::new(theta, args.t_max, args.x0, args.offset)?;
    let mut grid = Vec::new();
    let mut t = 0.0;
    while t <= args.t_max + 1e-9 {
        grid.push(t);
        t += args.step;
    }
    let ret = expected_return_curve(&law, &sub, &grid)?;
    let ext = extinction_curve(&law, &sub, &grid)?;
    let (last_t, last_ret) = *ret.points().last().unwrap();
    let (_, last_ext) = *ext.points().last().unwrap();
    write_outputs(
        &args.out.out_dir,
        &[
            (format!("{label}_expected_return.csv"), ret.to_csv()),
            (format!("{label}_extinction.csv"), ext.to_csv()),
        ],
    )?;
    println!(
        "{label}: {} points to t={last_t}; expected return ends {last_ret:.4}, extinction ends {last_ext:.4}",
        ret.len()
    );
    Ok(())
}

fn cmd_forecast(args: ForecastArgs) -> Result<(), CliError> {
    let params = build_params(args.rates.lambda, args.rates.eta)?;
    let theta = args.clock.resolve(args.rates.lambda)?;
    let law = GenerationLaw::new(params);
    let horizon = args.t.iter().cloned().fold(0.0f64, f64::max);
    let sub = SubordinationParams::new(theta, horizon, args.x0, args.offset)?;
    let mut out = String::from("t,expected_ratio,variance,prob_zero\n");
    for &t in &args.t {
        if t < 0.0 {
            return Err(CliError::Usage(format!("forecast time {t} is negative")));
        }
        let _ = writeln!(
            out,
            "{t},{:.4},{:.4},{:.4}",
            expected_ratio(&law, &sub, t),
            ratio_variance(&law, &sub, t),
            prob_zero(&law, &sub, t, jgw_core::subordinated::DEFAULT_TAIL_TOL)?,
        );
    }
    print!("{out}");
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let params = build_params(args.rates.lambda, args.rates.eta)?;
    let law = GenerationLaw::new(params);
    let config = SimConfig {
        n_paths: args.n_paths,
        seed: args.seed,
        max_population: args.max_population,
    };
    if config.n_paths == 0 {
        return Err(CliError::Usage("--n-paths must be at least 1".into()));
    }

    let mut out = String::new();
    let _ = writeln!(out, "paths = {}", config.n_paths);
    let _ = writeln!(out, "seed = {}", config.seed);

    let dump_content: String;
    match (args.generations, args.t) {
        (Some(generations), None) => {
            let sample = simulate_generations(&law, generations, &config)?;
            let n = sample.len() as f64;
            let mean = sample.iter().sum::<u64>() as f64 / n;
            let variance =
                sample.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let extinct = sample.iter().filter(|&&x| x == 0).count() as f64 / n;
            let _ = writeln!(out, "mode = generations {generations}");
            let _ = writeln!(out, "mean = {mean:.6}");
            let _ = writeln!(out, "variance = {variance:.6}");
            let _ = writeln!(out, "extinct_frequency = {extinct:.6}");
            let mut dump = String::from("population\n");
            for x in &sample {
                let _ = writeln!(dump, "{x}");
            }
            dump_content = dump;
        }
        (None, Some(t)) => {
            if t < 0.0 {
                return Err(CliError::Usage(format!("--t must be nonnegative, got {t}")));
            }
            let theta = args.clock.resolve(args.rates.lambda)?;
            let sub = SubordinationParams::new(theta, t, args.x0, args.offset)?;
            let sample: SubordinatedSample = simulate_subordinated(&law, &sub, t, &config)?;
            let _ = writeln!(out, "mode = subordinated t={t} theta={theta:.6}");
            let _ = writeln!(out, "mean = {:.6}", sample.mean());
            let _ = writeln!(out, "variance = {:.6}", sample.variance());
            let _ = writeln!(out, "zero_frequency = {:.6}", sample.zero_frequency());
            dump_content = sample.to_csv();
        }
        _ => {
            return Err(CliError::Usage(
                "pass exactly one of --generations or --t".into(),
            ))
        }
    }

    if let Some(dump) = &args.dump {
        if let Some(parent) = dump.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Data(format!("cannot create {}: {e}", parent.display())))?;
        }
        std::fs::write(dump, dump_content)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", dump.display())))?;
    }
    print!("{out}");
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let mut config = load_config(args.config.as_ref())?;
    if args.horizon_days.is_some() {
        config.horizon_days = args.horizon_days;
    }
    let mut reports = Vec::with_capacity(args.inputs.len());
    for input in &args.inputs {
        let series = load_series(input, None)?;
        reports.push(run_trend_algorithm(&series, &config)?);
    }
    let table1 = render_table1_csv(&reports);
    let table2 = render_table2_csv(&reports);
    write_outputs(
        &args.out.out_dir,
        &[
            ("table1.csv".to_string(), table1.clone()),
            ("table2.csv".to_string(), table2.clone()),
        ],
    )?;
    print!("{table1}\n{table2}");
    Ok(())
}
