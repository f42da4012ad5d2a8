//! JSON checkpoints. Floats are written with shortest round-trip formatting
//! so parameters reload bit-for-bit.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::network::PolicyNetwork;
use super::{PpoPolicy, TrainConfig, Variant};
use crate::env::{N_ACTIONS, OBS_DIM};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub variant: Variant,
    pub config_hash: String,
    pub step: u64,
    pub obs_dim: usize,
    pub n_actions: usize,
    pub hidden: Vec<usize>,
    pub config: TrainConfig,
    pub params: Vec<f64>,
}

/// SHA-256 over the canonical JSON form of the config.
pub fn config_hash(config: &TrainConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(bytes))
}

impl Checkpoint {
    pub fn new(net: &PolicyNetwork, config: &TrainConfig, step: u64) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            variant: config.variant,
            config_hash: config_hash(config),
            step,
            obs_dim: net.obs_dim(),
            n_actions: net.n_actions(),
            hidden: net.hidden().to_vec(),
            config: config.clone(),
            params: net.params().to_vec(),
        }
    }

    /// Rebuilds the network, checking it fits the environment's spaces.
    pub fn network(&self) -> Result<PolicyNetwork> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "format version {} is not supported (expected {CHECKPOINT_FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.obs_dim != OBS_DIM {
            return Err(Error::ShapeMismatch {
                expected: OBS_DIM,
                got: self.obs_dim,
            });
        }
        if self.n_actions != N_ACTIONS {
            return Err(Error::ShapeMismatch {
                expected: N_ACTIONS,
                got: self.n_actions,
            });
        }
        let got = self.params.len();
        PolicyNetwork::from_params(self.obs_dim, &self.hidden, self.n_actions, self.params.clone()).ok_or(
            Error::ShapeMismatch {
                expected: expected_param_count(self.obs_dim, &self.hidden, self.n_actions),
                got,
            },
        )
    }

    /// Policy that evaluates this checkpoint with the masking it was trained
    /// under.
    pub fn policy(&self, seed: u64) -> Result<PpoPolicy> {
        Ok(PpoPolicy::new(
            self.network()?,
            self.variant,
            self.config.env.ablations.no_clarify_alt,
            seed,
        ))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Checkpoint(format!("malformed checkpoint: {e}")))
    }
}

fn expected_param_count(obs_dim: usize, hidden: &[usize], n_actions: usize) -> usize {
    let mut n = 0;
    let mut inp = obs_dim;
    for &h in hidden {
        n += inp * h + h;
        inp = h;
    }
    n + inp * n_actions + n_actions + inp + 1
}

pub fn save_checkpoint(path: &Path, net: &PolicyNetwork, config: &TrainConfig, step: u64) -> Result<Checkpoint> {
    let ckpt = Checkpoint::new(net, config, step);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, ckpt.to_json()?).map_err(|e| Error::io(path, e))?;
    Ok(ckpt)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ckpt = Checkpoint::from_json(&text)?;
    ckpt.network()?;
    Ok(ckpt)
}
