//! The training loop: rollouts over the training personas, GAE, PPO updates,
//! the optional Lagrange multiplier and periodic evaluation snapshots.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dist::{action_mask, MaskedCategorical};
use super::lagrange::{lagrange_update, LagrangeState};
use super::network::PolicyNetwork;
use super::optim::Adam;
use super::update::{ppo_update, TrajectoryBuffer, Transition};
use super::{PpoPolicy, TrainConfig, Variant};
use crate::env::{Action, EedEnv, N_ACTIONS, OBS_DIM};
use crate::error::Result;
use crate::eval;
use crate::seed::derive_seed;

const STREAM_INIT: u64 = 1;
const STREAM_EPISODE: u64 = 2;
const STREAM_EVAL: u64 = 3;

/// One line of the JSON-lines training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogEntry {
    pub update: u64,
    pub step: u64,
    /// Mean undiscounted return of episodes finished in this rollout.
    pub mean_reward: Option<f64>,
    /// Mean violations per episode finished in this rollout.
    pub mean_cost: Option<f64>,
    pub episodes: usize,
    /// Multiplier after this update (Lagrangian variant only).
    pub lambda: Option<f64>,
    pub safety_scale: f64,
    pub total_loss: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSnapshot {
    pub step: u64,
    pub unsafe_pct: f64,
    pub refusal_f1: f64,
    pub mean_return: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: PolicyNetwork,
    pub log: Vec<TrainLogEntry>,
    pub snapshots: Vec<EvalSnapshot>,
    pub steps: u64,
    pub final_lambda: Option<f64>,
}

impl TrainOutcome {
    pub fn policy(&self, variant: Variant, no_clarify_alt: bool, seed: u64) -> PpoPolicy {
        PpoPolicy::new(self.network.clone(), variant, no_clarify_alt, seed)
    }
}

pub fn train(config: &TrainConfig) -> Result<TrainOutcome> {
    train_with_observer(config, |_| Ok(()))
}

/// Same as [`train`], calling `on_update` with every log entry as soon as it
/// is produced.
pub fn train_with_observer<F>(config: &TrainConfig, mut on_update: F) -> Result<TrainOutcome>
where
    F: FnMut(&TrainLogEntry) -> Result<()>,
{
    config.validate()?;
    let personas = config.persona_names()?;
    let mut envs = personas
        .iter()
        .map(|name| EedEnv::new(config.env.clone().with_persona(name)))
        .collect::<Result<Vec<_>>>()?;
    let ablations = config.env.ablations;
    let curriculum = config.env.curriculum;
    let masked = config.variant.masks_unsafe_comply();

    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_INIT, 0));
    let mut net = PolicyNetwork::new(OBS_DIM, &config.hidden, N_ACTIONS, &mut init_rng);
    let mut opt = Adam::new(net.n_params(), config.learning_rate);
    let mut lagrange = (config.variant == Variant::Lagrangian).then(|| LagrangeState::new(&config.lagrange));
    let mut act_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_INIT, 1));
    let mut update_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_INIT, 2));

    let mut episode: u64 = 0;
    let mut current = 0usize;
    let (mut obs, _) = envs[current].reset(derive_seed(config.seed, STREAM_EPISODE, episode));
    let (mut ep_return, mut ep_cost) = (0.0, 0.0);

    let mut buffer = TrajectoryBuffer::with_capacity(config.n_steps);
    let mut log = Vec::new();
    let mut snapshots = Vec::new();
    let mut step: u64 = 0;
    let mut next_snapshot = config.eval_interval;

    for update in 0..config.n_updates() {
        buffer.clear();
        let mut finished: Vec<(f64, f64)> = Vec::new();
        let scale = curriculum.scale(step, config.total_steps, !ablations.no_curriculum);
        for _ in 0..config.n_steps {
            let scale = curriculum.scale(step, config.total_steps, !ablations.no_curriculum);
            let env = &mut envs[current];
            env.set_safety_scale(scale);
            let x = obs.to_array();
            let mask = action_mask(&obs, masked, ablations.no_clarify_alt);
            let (logits, value) = net.forward(&x);
            let dist = MaskedCategorical::new(&logits, &mask);
            let a = dist.sample(&mut act_rng);
            let res = env.step(Action::ALL[a])?;
            step += 1;
            ep_return += res.reward;
            ep_cost += res.cost;
            let done = res.terminated || res.truncated;
            let truncation_value = (res.truncated && !res.terminated).then(|| net.value(&res.observation.to_array()));
            buffer.push(Transition {
                obs: x,
                action: a,
                log_prob: dist.log_prob(a),
                value,
                reward: res.reward,
                cost: res.cost,
                done,
                mask,
                truncation_value,
            });
            if done {
                finished.push((ep_return, ep_cost));
                ep_return = 0.0;
                ep_cost = 0.0;
                episode += 1;
                current = (episode % envs.len() as u64) as usize;
                obs = envs[current].reset(derive_seed(config.seed, STREAM_EPISODE, episode)).0;
            } else {
                obs = res.observation;
            }
        }
        let last_value = net.value(&obs.to_array());
        buffer.finish(last_value, config.gamma, config.gae_lambda, lagrange.as_ref())?;
        let stats = ppo_update(&buffer, &mut net, &mut opt, config, &mut update_rng)?;

        let mean = |f: fn(&(f64, f64)) -> f64| {
            (!finished.is_empty()).then(|| finished.iter().map(f).sum::<f64>() / finished.len() as f64)
        };
        let mean_reward = mean(|e| e.0);
        let mean_cost = mean(|e| e.1);
        if let (Some(l), Some(c)) = (lagrange.as_mut(), mean_cost) {
            *l = lagrange_update(*l, c);
        }
        let entry = TrainLogEntry {
            update,
            step,
            mean_reward,
            mean_cost,
            episodes: finished.len(),
            lambda: lagrange.map(|l| l.lambda),
            safety_scale: scale,
            total_loss: stats.total,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
            approx_kl: stats.approx_kl,
            clip_fraction: stats.clip_fraction,
        };
        on_update(&entry)?;
        log.push(entry);

        if config.eval_interval > 0 && step >= next_snapshot {
            next_snapshot += config.eval_interval;
            snapshots.push(snapshot(&net, config, &personas, step)?);
        }
    }

    Ok(TrainOutcome {
        network: net,
        log,
        snapshots,
        steps: step,
        final_lambda: lagrange.map(|l| l.lambda),
    })
}

/// Deterministic evaluation of a frozen copy of the parameters.
fn snapshot(net: &PolicyNetwork, config: &TrainConfig, personas: &[String], step: u64) -> Result<EvalSnapshot> {
    let mut logs = Vec::new();
    for (i, name) in personas.iter().enumerate() {
        let mut policy = PpoPolicy::new(net.clone(), config.variant, config.env.ablations.no_clarify_alt, 0);
        let env = config.env.clone().with_persona(name);
        let seed = derive_seed(config.seed, STREAM_EVAL, i as u64);
        logs.extend(eval::rollout(&mut policy, &env, config.eval_episodes, seed, true)?);
    }
    let m = eval::compute_metrics(&logs);
    Ok(EvalSnapshot {
        step,
        unsafe_pct: m.unsafe_pct,
        refusal_f1: m.f1,
        mean_return: m.mean_return,
    })
}
