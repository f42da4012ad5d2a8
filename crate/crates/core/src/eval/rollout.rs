use serde::{Deserialize, Serialize};

use crate::env::{Action, EedEnv, EnvConfig};
use crate::error::Result;
use crate::policies::Policy;

/// What happened at one decision step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Agent refused (actions 1 to 4 only).
    pub refused: bool,
    /// Oracle says refusal was justified.
    pub oracle: bool,
    pub p_hat: f64,
    pub p: f64,
    pub tau: f64,
    pub risky: bool,
    pub complied: bool,
    pub violation: bool,
    pub action: Action,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refusal_score: Option<f64>,
    pub reward: f64,
    /// Trust and valence after the step.
    pub trust: f64,
    pub valence: f64,
}

impl StepRecord {
    /// Risk reached the observed threshold, so a masked policy could not
    /// comply here.
    pub fn in_masked_state(&self) -> bool {
        self.p_hat >= self.tau
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub persona: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stressor: Option<String>,
    pub seed: u64,
    pub total_reward: f64,
    pub steps: Vec<StepRecord>,
}

/// Runs `n_episodes` episodes with seeds `seed, seed + 1, ...`.
pub fn rollout(
    policy: &mut dyn Policy,
    env_config: &EnvConfig,
    n_episodes: usize,
    seed: u64,
    deterministic: bool,
) -> Result<Vec<EpisodeLog>> {
    if n_episodes == 0 {
        return Ok(Vec::new());
    }
    let mut env = EedEnv::new(env_config.clone())?;
    let mut logs = Vec::with_capacity(n_episodes);
    for i in 0..n_episodes as u64 {
        let ep_seed = seed.wrapping_add(i);
        let (mut obs, info) = env.reset(ep_seed);
        policy.reset();
        let mut steps = Vec::with_capacity(env_config.horizon as usize);
        let mut total = 0.0;
        loop {
            let decision = policy.act(&obs, deterministic);
            let res = env.step(decision.action)?;
            let info = &res.info;
            total += res.reward;
            steps.push(StepRecord {
                refused: decision.action.is_refusal(),
                oracle: info.oracle,
                p_hat: info.p_hat,
                p: info.p,
                tau: info.tau,
                risky: info.risky,
                complied: info.complied,
                violation: info.violation,
                action: decision.action,
                refusal_score: decision.refusal_probability,
                reward: res.reward,
                trust: info.trust,
                valence: info.valence,
            });
            obs = res.observation;
            if res.terminated || res.truncated {
                break;
            }
        }
        logs.push(EpisodeLog {
            persona: info.persona,
            stressor: info.stressor,
            seed: ep_seed,
            total_reward: total,
            steps,
        });
    }
    Ok(logs)
}
