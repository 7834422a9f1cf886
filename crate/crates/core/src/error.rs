//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between ingesting a price file and
/// emitting a report.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input data (CSV or config), with a 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A series-level operation was handed no observations.
    #[error("empty series")]
    EmptySeries,

    /// No ratio fell below one, so the zero-class rate estimate diverges.
    #[error("unbounded rate: none of the {n} ratios is below one (zero-class frequency is 0)")]
    UnboundedRate { n: usize },

    /// Every ratio fell below one, pinning the rate estimate at zero.
    #[error("degenerate rate: all {n} ratios are below one (estimate collapses to 0)")]
    DegenerateRate { n: usize },

    /// Fixed-point iteration ran out of budget before the step shrank
    /// below tolerance. Carries the last iterate for diagnostics.
    #[error("fixed point did not converge after {iterations} iterations (last iterate {last}, step {step:e})")]
    Convergence { iterations: u64, last: f64, step: f64 },

    /// Two series that must be evaluated pointwise have different lengths.
    #[error("alignment error: {ratios} ratios vs {times} time points")]
    Alignment { ratios: usize, times: usize },

    /// A simulated generation outgrew the configured population cap.
    #[error("population {population} exceeded cap {cap} at generation {generation}")]
    PopulationCap { generation: u32, population: u64, cap: u64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub(crate) fn domain_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::domain(msg))
}
