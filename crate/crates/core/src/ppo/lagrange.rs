//! Projected dual ascent on the violation budget.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LagrangeConfig {
    /// Allowed expected violations per episode.
    pub budget: f64,
    pub multiplier_lr: f64,
    pub initial_lambda: f64,
}

impl Default for LagrangeConfig {
    fn default() -> Self {
        Self {
            budget: 1.0,
            multiplier_lr: 0.05,
            initial_lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangeState {
    pub lambda: f64,
    pub budget: f64,
    pub multiplier_lr: f64,
}

impl LagrangeState {
    pub fn new(cfg: &LagrangeConfig) -> Self {
        Self {
            lambda: cfg.initial_lambda.max(0.0),
            budget: cfg.budget,
            multiplier_lr: cfg.multiplier_lr,
        }
    }

    /// Per-step reward after penalizing the cost signal.
    pub fn penalize(&self, reward: f64, cost: f64) -> f64 {
        reward - self.lambda * cost
    }
}

pub fn lagrange_update(state: LagrangeState, mean_episode_cost: f64) -> LagrangeState {
    LagrangeState {
        lambda: (state.lambda + state.multiplier_lr * (mean_episode_cost - state.budget)).max(0.0),
        ..state
    }
}
