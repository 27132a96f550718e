use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Statistic};
use super::{configured_threads, run_trials, wilson_interval, Proportion};
use crate::error::{Error, Result};
use crate::linalg::{row_distances, spectrum, Matrix};
use crate::samplers::{build_shift, sample_matrix, RowDistribution, SeedSpec, ShiftSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub t: f64,
    pub trials: usize,
    pub hits: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub config: ExperimentConfig,
    pub points: Vec<TailPoint>,
    pub wall_time_secs: f64,
}

fn sample_shifted(dist: RowDistribution, shift: &Matrix, seed: SeedSpec) -> Result<Matrix> {
    sample_matrix(dist, shift.n(), seed)?.add(shift)
}

/// Raw per-trial value; [`is_hit`] turns it into an event at each `t`.
fn trial_value(config: &ExperimentConfig, shift: &Matrix, trial: u64) -> Result<f64> {
    let b = sample_shifted(config.dist, shift, SeedSpec::new(config.master_seed, trial))?;
    let n = config.n as f64;
    Ok(match config.statistic {
        Statistic::SminScaled => spectrum(&b).s_min * n.sqrt(),
        Statistic::HsScaledSqrt => spectrum(&b).hs_inverse / n.sqrt(),
        Statistic::HsScaledN => spectrum(&b).hs_inverse / n,
        Statistic::DistanceProfile { k, .. } => {
            let mut d = row_distances(&b);
            d.sort_by(f64::total_cmp);
            d.get(k - 1).copied().unwrap_or(f64::INFINITY)
        }
    })
}

fn is_hit(statistic: Statistic, value: f64, t: f64) -> bool {
    match statistic {
        Statistic::SminScaled => value <= t,
        Statistic::HsScaledSqrt | Statistic::HsScaledN => value >= t,
        Statistic::DistanceProfile { a, .. } => value <= a * t,
    }
}

/// Estimates the hit probability at every grid point, with the worker count
/// taken from `SMINLAB_THREADS` when set.
pub fn estimate_tail(config: &ExperimentConfig) -> Result<TailEstimate> {
    estimate_tail_with_threads(config, configured_threads()?)
}

/// Like [`estimate_tail`] with an explicit worker cap (`None`: rayon's default).
pub fn estimate_tail_with_threads(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<TailEstimate> {
    config.validate()?;
    let start = Instant::now();
    let shift = build_shift(&config.shift, config.n)?;
    let values = run_trials(config.trials, threads, |k| trial_value(config, &shift, k))?;
    let points = config
        .t_grid
        .iter()
        .map(|&t| {
            let hits = values.iter().filter(|&&v| is_hit(config.statistic, v, t)).count();
            let p = Proportion::new(hits, config.trials);
            TailPoint {
                t,
                trials: p.trials,
                hits,
                p_hat: p.p_hat,
                ci_low: p.ci_low,
                ci_high: p.ci_high,
            }
        })
        .collect();
    Ok(TailEstimate {
        config: config.clone(),
        points,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// [`estimate_tail`] restricted to the distance-profile statistic: at grid
/// point `t`, the fraction of trials with at least `k` rows within `a·t` of
/// the span of the others.
pub fn distance_profile_tail(config: &ExperimentConfig) -> Result<TailEstimate> {
    if !matches!(config.statistic, Statistic::DistanceProfile { .. }) {
        return Err(Error::invalid(format!(
            "distance_profile_tail needs the distance_profile statistic, got {}",
            config.statistic
        )));
    }
    estimate_tail(config)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub k: usize,
    pub rate: Proportion,
}

/// For each `k`, the fraction of trials in which at least `k` rows satisfy
/// `dist(R_i, H^i) ≤ a`. All `k` share the same realizations, so the rates
/// are nonincreasing in `k`.
pub fn distance_profile_sweep(
    dist: RowDistribution,
    shift: &ShiftSpec,
    n: usize,
    trials: usize,
    master_seed: u64,
    a: f64,
    ks: &[usize],
) -> Result<Vec<SweepPoint>> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!("a must be positive, got {a}")));
    }
    if ks.contains(&0) {
        return Err(Error::invalid("k must be at least 1"));
    }
    let m = build_shift(shift, n)?;
    let counts = run_trials(trials, configured_threads()?, |trial| {
        let b = sample_shifted(dist, &m, SeedSpec::new(master_seed, trial))?;
        Ok(row_distances(&b).iter().filter(|&&d| d <= a).count())
    })?;
    Ok(ks
        .iter()
        .map(|&k| SweepPoint {
            k,
            rate: Proportion::new(counts.iter().filter(|&&c| c >= k).count(), trials),
        })
        .collect())
}

/// Least-squares slope of `log p̂` against `log(n/k)` over the sweep points
/// whose confidence interval excludes zero. `None` with fewer than two such
/// points.
pub fn profile_slope(n: usize, sweep: &[SweepPoint]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = sweep
        .iter()
        .filter(|p| p.rate.ci_low > 0.0)
        .map(|p| ((n as f64 / p.k as f64).ln(), p.rate.p_hat.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

impl TailEstimate {
    /// Grid point closest to `t`.
    pub fn point_near(&self, t: f64) -> Option<&TailPoint> {
        self.points
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    /// Checks the interval invariant `0 ≤ low ≤ p̂ ≤ high ≤ 1` at every point.
    pub fn intervals_consistent(&self) -> bool {
        self.points.iter().all(|p| {
            let (lo, hi) = wilson_interval(p.hits, p.trials);
            0.0 <= p.ci_low
                && p.ci_low <= p.p_hat
                && p.p_hat <= p.ci_high
                && p.ci_high <= 1.0
                && lo == p.ci_low
                && hi == p.ci_high
        })
    }
}
