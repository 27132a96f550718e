use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samplers::{RowDistribution, ShiftSpec};

/// Per-trial quantity compared against the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Hit iff `√n · s_min(A+M) ≤ t`; singular realizations count as `s_min = 0`.
    SminScaled,
    /// Hit iff `‖(A+M)⁻¹‖_HS ≥ t√n`.
    HsScaledSqrt,
    /// Hit iff `‖(A+M)⁻¹‖_HS ≥ tn`.
    HsScaledN,
    /// Hit iff at least `k` rows have `dist(R_i, H^i) ≤ a·t`.
    DistanceProfile { k: usize, a: f64 },
}

impl Statistic {
    pub fn label(&self) -> String {
        match self {
            Statistic::SminScaled => "smin_scaled".into(),
            Statistic::HsScaledSqrt => "hs_scaled_sqrt".into(),
            Statistic::HsScaledN => "hs_scaled_n".into(),
            Statistic::DistanceProfile { k, a } => format!("distance_profile(k={k},a={a})"),
        }
    }

    /// Whether the hit event grows with `t`.
    pub fn is_lower_tail(&self) -> bool {
        matches!(self, Statistic::SminScaled | Statistic::DistanceProfile { .. })
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dist: RowDistribution,
    pub shift: ShiftSpec,
    pub n: usize,
    pub trials: usize,
    pub t_grid: Vec<f64>,
    pub master_seed: u64,
    pub statistic: Statistic,
}

impl ExperimentConfig {
    /// Checks `n ≥ 1`, `trials ≥ 1`, a finite nonnegative strictly increasing
    /// grid, and the statistic's own parameters.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if let Some(t) = self.t_grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::invalid(format!("grid point {t} is not a finite nonnegative number")));
        }
        if self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("t_grid must be strictly increasing"));
        }
        if let Statistic::DistanceProfile { k, a } = self.statistic {
            if k == 0 {
                return Err(Error::invalid("distance profile needs k >= 1"));
            }
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::invalid(format!("distance profile needs a > 0, got {a}")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }
}
