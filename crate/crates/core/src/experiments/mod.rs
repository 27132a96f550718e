//! Monte Carlo tail estimation for shifted random matrices.
//!
//! Trial `k` of an experiment draws its matrix from the stream keyed by
//! `(master_seed, k)`, and results are merged in trial order, so hit counts
//! do not depend on how many workers ran. Each trial's statistic is computed
//! once and compared against every grid point.

mod config;
mod counterexample;
mod output;
mod tail;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, Statistic};
pub use counterexample::{
    counterexample_experiment, CounterexampleConfig, CounterexampleReport, ThresholdRate,
    KAPPA_CONSTANTS, SMIN_CONSTANTS,
};
pub use output::{emit_results, write_csv, write_json, OutputFormat, CSV_COLUMNS};
pub use tail::{
    distance_profile_sweep, distance_profile_tail, estimate_tail, estimate_tail_with_threads,
    profile_slope, SweepPoint, TailEstimate, TailPoint,
};

use crate::error::{Error, Result};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "SMINLAB_THREADS";
/// Normal quantile for 95% intervals.
pub const WILSON_Z: f64 = 1.96;

/// Worker cap from `SMINLAB_THREADS`, if set to a positive integer.
pub fn configured_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(Error::invalid(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))),
            Ok(t) => Ok(Some(t)),
        },
    }
}

/// Runs `f` on trial indices `0..trials`, returning results in index order.
pub(crate) fn run_trials<T, F>(trials: usize, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let work = || (0..trials as u64).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
    match threads {
        None => work(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::invalid(format!("cannot build a pool of {t} threads: {e}")))?
            .install(work),
    }
}

/// Wilson score interval at `z = 1.96`.
pub fn wilson_interval(hits: usize, trials: usize) -> (f64, f64) {
    assert!(trials > 0 && hits <= trials);
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if hits == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let high = if hits == trials { 1.0 } else { (center + half).clamp(p, 1.0) };
    (low, high)
}

/// A hit count with its point estimate and Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub hits: usize,
    pub trials: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Proportion {
    pub fn new(hits: usize, trials: usize) -> Self {
        let (ci_low, ci_high) = wilson_interval(hits, trials);
        Self {
            hits,
            trials,
            p_hat: hits as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }
}
