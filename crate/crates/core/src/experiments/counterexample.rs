use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{configured_threads, run_trials, Proportion};
use crate::error::{Error, Result};
use crate::linalg::{norm, spectrum};
use crate::samplers::{
    build_shift, counterexample_witness, sample_matrix, RowDistribution, SeedSpec, ShiftSpec,
};

/// `C` in the events `s_min(B+M) ≤ Cn/τ`.
pub const SMIN_CONSTANTS: [f64; 3] = [1.0, 5.0, 10.0];
/// `c′` in the events `κ(B+M) ≥ c′τ²/n`.
pub const KAPPA_CONSTANTS: [f64; 2] = [0.01, 0.1];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleConfig {
    pub n: usize,
    pub tau: f64,
    pub trials: usize,
    pub master_seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRate {
    pub constant: f64,
    pub threshold: f64,
    pub rate: Proportion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub config: CounterexampleConfig,
    /// `P{s_min ≤ Cn/τ}` for each `C` in [`SMIN_CONSTANTS`].
    pub smin: Vec<ThresholdRate>,
    /// `P{κ ≥ c′τ²/n}` for each `c′` in [`KAPPA_CONSTANTS`].
    pub kappa: Vec<ThresholdRate>,
    /// Frequency of a vanishing bottom-right 2×2 row-sum pattern.
    pub corner_event: Proportion,
    /// Median `s_min` over corner-event trials.
    pub corner_smin_median: Option<f64>,
    /// Median of `‖(B+M)X‖/‖X‖` for the witness `X` over corner-event trials.
    pub corner_witness_median: Option<f64>,
    /// Corner-event trials where `s_min` exceeded the witness ratio.
    pub witness_violations: usize,
    pub wall_time_secs: f64,
}

struct Trial {
    s_min: f64,
    kappa: f64,
    corner: Option<f64>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

/// Bernoulli `B` shifted by `diag(τ,…,τ,0,0)`.
///
/// On the corner event the two bottom rows of `B + M` annihilate `(…,1,1)`
/// in their last two columns, and the witness vector certifies
/// `s_min ≲ n/τ`.
pub fn counterexample_experiment(config: &CounterexampleConfig) -> Result<CounterexampleReport> {
    let CounterexampleConfig {
        n,
        tau,
        trials,
        master_seed,
    } = *config;
    if n < 3 {
        return Err(Error::invalid(format!("counterexample needs n >= 3, got {n}")));
    }
    if !(tau >= n as f64 && tau.is_finite()) {
        return Err(Error::invalid(format!("counterexample needs finite τ >= n = {n}, got {tau}")));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let start = Instant::now();
    let m = build_shift(&ShiftSpec::Counterexample(tau), n)?;
    let results = run_trials(trials, configured_threads()?, |k| {
        let b = sample_matrix(RowDistribution::Bernoulli, n, SeedSpec::new(master_seed, k))?;
        let bm = b.add(&m)?;
        let spec = spectrum(&bm);
        let (p, q) = (n - 2, n - 1);
        let top = b.get(p, p) + b.get(p, q);
        let bottom = b.get(q, p) + b.get(q, q);
        let corner = if top * top + bottom * bottom == 0.0 {
            let x = counterexample_witness(&b, tau)?;
            let bx: Vec<f64> = bm.rows().map(|r| r.iter().zip(&x).map(|(u, v)| u * v).sum()).collect();
            Some(norm(&bx) / norm(&x))
        } else {
            None
        };
        Ok(Trial {
            s_min: spec.s_min,
            kappa: spec.condition_number(),
            corner,
        })
    })?;

    let n_f = n as f64;
    let smin = SMIN_CONSTANTS
        .iter()
        .map(|&c| {
            let threshold = c * n_f / tau;
            ThresholdRate {
                constant: c,
                threshold,
                rate: Proportion::new(results.iter().filter(|r| r.s_min <= threshold).count(), trials),
            }
        })
        .collect();
    let kappa = KAPPA_CONSTANTS
        .iter()
        .map(|&c| {
            let threshold = c * tau * tau / n_f;
            ThresholdRate {
                constant: c,
                threshold,
                rate: Proportion::new(results.iter().filter(|r| r.kappa >= threshold).count(), trials),
            }
        })
        .collect();
    let corner: Vec<&Trial> = results.iter().filter(|r| r.corner.is_some()).collect();
    let witness_violations = corner
        .iter()
        .filter(|r| r.s_min > r.corner.unwrap() * (1.0 + 1e-9) + 1e-12)
        .count();
    Ok(CounterexampleReport {
        config: *config,
        smin,
        kappa,
        corner_event: Proportion::new(corner.len(), trials),
        corner_smin_median: median(corner.iter().map(|r| r.s_min).collect()),
        corner_witness_median: median(corner.iter().map(|r| r.corner.unwrap()).collect()),
        witness_violations,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}
