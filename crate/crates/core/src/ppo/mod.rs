//! Proximal policy optimization over the refusal environment: vanilla,
//! action-masked and Lagrangian-constrained variants.

mod agent;
mod checkpoint;
pub mod dist;
pub mod gae;
pub mod lagrange;
pub mod network;
pub mod optim;
mod train;
pub mod update;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use agent::PpoPolicy;
pub use checkpoint::{config_hash, load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_FORMAT_VERSION};
pub use dist::{action_mask, ActionMask, MaskedCategorical, ALL_ALLOWED};
pub use gae::{compute_gae, normalize_advantages};
pub use lagrange::{lagrange_update, LagrangeConfig, LagrangeState};
pub use network::PolicyNetwork;
pub use optim::Adam;
pub use train::{train, train_with_observer, EvalSnapshot, TrainLogEntry, TrainOutcome};
pub use update::{clipped_surrogate, ppo_loss, ppo_update, LossCoefs, LossSample, LossStats, TrajectoryBuffer, Transition};

use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::personas;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Vanilla,
    Masked,
    Lagrangian,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Vanilla, Variant::Masked, Variant::Lagrangian];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Vanilla => "vanilla",
            Variant::Masked => "masked",
            Variant::Lagrangian => "lagrangian",
        }
    }

    pub fn masks_unsafe_comply(self) -> bool {
        self == Variant::Masked
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vanilla" | "ppo" => Ok(Variant::Vanilla),
            "masked" => Ok(Variant::Masked),
            "lagrangian" | "lagrange" => Ok(Variant::Lagrangian),
            other => Err(Error::Config(format!(
                "unknown variant {other:?}; expected vanilla, masked or lagrangian"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub total_steps: u64,
    pub n_steps: usize,
    pub minibatch_size: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_epsilon: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub epochs: usize,
    pub max_grad_norm: f64,
    pub seed: u64,
    pub variant: Variant,
    pub lagrange: LagrangeConfig,
    pub hidden: Vec<usize>,
    /// Environment steps between evaluation snapshots; 0 disables them.
    pub eval_interval: u64,
    /// Episodes per training persona in each snapshot.
    pub eval_episodes: usize,
    /// Personas cycled during training; empty means the training split.
    pub personas: Vec<String>,
    /// Template for every training environment; its persona is overridden.
    pub env: EnvConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            total_steps: 600_000,
            n_steps: 256,
            minibatch_size: 256,
            learning_rate: 3e-4,
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_epsilon: 0.2,
            entropy_coef: 0.1,
            value_coef: 0.5,
            epochs: 10,
            max_grad_norm: 0.5,
            seed: 0,
            variant: Variant::Vanilla,
            lagrange: LagrangeConfig::default(),
            hidden: vec![64, 64],
            eval_interval: 0,
            eval_episodes: 5,
            personas: Vec::new(),
            env: EnvConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("gamma", self.gamma),
            ("gae_lambda", self.gae_lambda),
            ("value_coef", self.value_coef),
            ("max_grad_norm", self.max_grad_norm),
            ("lagrange.multiplier_lr", self.lagrange.multiplier_lr),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive (got {v})")));
            }
        }
        if self.gamma > 1.0 || self.gae_lambda > 1.0 {
            return Err(Error::Config("gamma and gae_lambda must not exceed 1".into()));
        }
        if !(self.entropy_coef >= 0.0) {
            return Err(Error::Config("entropy_coef must be non-negative".into()));
        }
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return Err(Error::Config(format!(
                "clip_epsilon = {} must lie in (0, 1)",
                self.clip_epsilon
            )));
        }
        if self.n_steps == 0 || self.minibatch_size == 0 || !self.n_steps.is_multiple_of(self.minibatch_size) {
            return Err(Error::Config(format!(
                "minibatch_size {} must divide n_steps {}",
                self.minibatch_size, self.n_steps
            )));
        }
        if self.total_steps < self.n_steps as u64 {
            return Err(Error::Config(format!(
                "total_steps {} is shorter than one rollout of {}",
                self.total_steps, self.n_steps
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::Config("hidden layer sizes must be non-empty and positive".into()));
        }
        if !(self.lagrange.budget >= 0.0) || !(self.lagrange.initial_lambda >= 0.0) {
            return Err(Error::Config("lagrange budget and initial_lambda must be non-negative".into()));
        }
        self.persona_names()?;
        self.env.validate()
    }

    /// Resolved names of the personas cycled during training.
    pub fn persona_names(&self) -> Result<Vec<String>> {
        if self.personas.is_empty() {
            return Ok(personas::training_personas().into_iter().map(|p| p.name).collect());
        }
        self.personas
            .iter()
            .map(|n| personas::find_persona(n).map(|p| p.name))
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: TrainConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn n_updates(&self) -> u64 {
        self.total_steps / self.n_steps as u64
    }
}
