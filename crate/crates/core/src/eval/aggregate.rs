use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::metrics::{MetricWarning, Metrics};
use crate::error::{Error, Result};

/// Mean with an optional two-sided Student-t confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

impl Estimate {
    pub fn interval(&self) -> Option<(f64, f64)> {
        self.half_width.map(|h| (self.mean - h, self.mean + h))
    }

    /// Whether the two intervals share no point. False when either lacks one.
    pub fn disjoint_from(&self, other: &Estimate) -> bool {
        match (self.interval(), other.interval()) {
            (Some((a_lo, a_hi)), Some((b_lo, b_hi))) => a_hi < b_lo || b_hi < a_lo,
            _ => false,
        }
    }
}

/// `mean ± t_{n-1} · sd / sqrt(n)` with the sample standard deviation. A
/// single value has no interval.
pub fn aggregate_ci(values: &[f64], level: f64) -> Result<Estimate> {
    if values.is_empty() {
        return Err(Error::LengthMismatch("cannot aggregate an empty set of values".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("confidence level {level} must lie in (0, 1)")));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Ok(Estimate { mean, half_width: None });
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = StudentsT::new(0.0, 1.0, n - 1.0)
        .expect("degrees of freedom are positive")
        .inverse_cdf(0.5 + level / 2.0);
    Ok(Estimate {
        mean,
        half_width: Some(t * var.sqrt() / n.sqrt()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub mean_reward: Estimate,
    pub unsafe_pct: Estimate,
    pub refusals_per_episode: Estimate,
    pub justified_ratio: Estimate,
    pub precision: Estimate,
    pub recall: Estimate,
    pub f1: Estimate,
    pub spearman_rho: Estimate,
    pub brier: Estimate,
    pub auroc: Estimate,
    pub pr_auc: Estimate,
    pub mean_trust: Estimate,
    pub mean_valence: Estimate,
    pub masked_state_compliance: u64,
    pub n_episodes: usize,
    pub n_seeds: usize,
    pub level: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<MetricWarning>,
}

impl MetricsSummary {
    /// Aggregates one [`Metrics`] per seed.
    pub fn from_seeds(per_seed: &[Metrics], level: f64) -> Result<Self> {
        let est = |f: fn(&Metrics) -> f64| -> Result<Estimate> {
            aggregate_ci(&per_seed.iter().map(f).collect::<Vec<_>>(), level)
        };
        let mut warnings: Vec<MetricWarning> = per_seed.iter().flat_map(|m| m.warnings.iter().copied()).collect();
        warnings.sort();
        warnings.dedup();
        Ok(Self {
            mean_reward: est(|m| m.mean_return)?,
            unsafe_pct: est(|m| m.unsafe_pct)?,
            refusals_per_episode: est(|m| m.refusals_per_episode)?,
            justified_ratio: est(|m| m.justified_ratio)?,
            precision: est(|m| m.precision)?,
            recall: est(|m| m.recall)?,
            f1: est(|m| m.f1)?,
            spearman_rho: est(|m| m.spearman_rho)?,
            brier: est(|m| m.brier)?,
            auroc: est(|m| m.auroc)?,
            pr_auc: est(|m| m.pr_auc)?,
            mean_trust: est(|m| m.mean_trust)?,
            mean_valence: est(|m| m.mean_valence)?,
            masked_state_compliance: per_seed.iter().map(|m| m.masked_state_compliance).sum(),
            n_episodes: per_seed.iter().map(|m| m.n_episodes).sum(),
            n_seeds: per_seed.len(),
            level,
            warnings,
        })
    }

    /// Estimates in report column order.
    pub fn columns(&self) -> [(&'static str, Estimate); 13] {
        [
            ("mean_reward", self.mean_reward),
            ("unsafe_pct", self.unsafe_pct),
            ("refusals_per_episode", self.refusals_per_episode),
            ("justified_ratio", self.justified_ratio),
            ("f1", self.f1),
            ("spearman_rho", self.spearman_rho),
            ("mean_trust", self.mean_trust),
            ("precision", self.precision),
            ("recall", self.recall),
            ("brier", self.brier),
            ("auroc", self.auroc),
            ("pr_auc", self.pr_auc),
            ("mean_valence", self.mean_valence),
        ]
    }
}
