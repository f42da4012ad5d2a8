//! Rollout storage, the clipped-surrogate loss with its analytic gradient,
//! and the minibatched PPO update.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dist::{ActionMask, MaskedCategorical};
use super::gae::{compute_gae, normalize_advantages};
use super::lagrange::LagrangeState;
use super::network::PolicyNetwork;
use super::optim::{clip_grad_norm, Adam};
use super::TrainConfig;
use crate::env::OBS_DIM;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: [f64; OBS_DIM],
    pub action: usize,
    pub log_prob: f64,
    pub value: f64,
    pub reward: f64,
    pub cost: f64,
    pub done: bool,
    pub mask: ActionMask,
    /// Critic value of the successor state when the episode was cut off by
    /// the horizon rather than terminated.
    pub truncation_value: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct TrajectoryBuffer {
    pub transitions: Vec<Transition>,
    advantages: Vec<f64>,
    returns: Vec<f64>,
}

impl TrajectoryBuffer {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            transitions: Vec::with_capacity(n),
            advantages: Vec::new(),
            returns: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        self.advantages.clear();
        self.returns.clear();
        self.transitions.push(t);
    }

    pub fn clear(&mut self) {
        self.transitions.clear();
        self.advantages.clear();
        self.returns.clear();
    }

    /// Computes advantages and returns from the stored rewards, optionally
    /// penalized by the Lagrange multiplier. Truncated steps bootstrap
    /// `gamma * V(next)` into their reward.
    pub fn finish(&mut self, last_value: f64, gamma: f64, gae_lambda: f64, lagrange: Option<&LagrangeState>) -> Result<()> {
        let rewards: Vec<f64> = self
            .transitions
            .iter()
            .map(|t| {
                let r = match lagrange {
                    Some(l) => l.penalize(t.reward, t.cost),
                    None => t.reward,
                };
                r + t.truncation_value.map_or(0.0, |v| gamma * v)
            })
            .collect();
        let values: Vec<f64> = self.transitions.iter().map(|t| t.value).collect();
        let dones: Vec<bool> = self.transitions.iter().map(|t| t.done).collect();
        let (adv, ret) = compute_gae(&rewards, &values, &dones, last_value, gamma, gae_lambda)?;
        self.advantages = adv;
        self.returns = ret;
        Ok(())
    }

    pub fn advantages(&self) -> &[f64] {
        &self.advantages
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossSample {
    pub obs: [f64; OBS_DIM],
    pub action: usize,
    pub old_log_prob: f64,
    pub advantage: f64,
    pub ret: f64,
    pub mask: ActionMask,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossCoefs {
    pub clip_epsilon: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossStats {
    pub total: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// `min(r A, clip(r, 1-eps, 1+eps) A)`.
pub fn clipped_surrogate(ratio: f64, advantage: f64, eps: f64) -> f64 {
    (ratio * advantage).min(ratio.clamp(1.0 - eps, 1.0 + eps) * advantage)
}

/// Mean loss over `batch`; when `grad` is given, adds the gradient of the
/// total loss with respect to the network parameters.
pub fn ppo_loss(net: &PolicyNetwork, batch: &[LossSample], coefs: &LossCoefs, mut grad: Option<&mut [f64]>) -> LossStats {
    let n = batch.len() as f64;
    let mut stats = LossStats::default();
    let mut dlogits = vec![0.0; net.n_actions()];
    for s in batch {
        let cache = net.forward_cached(&s.obs);
        let dist = MaskedCategorical::new(&cache.logits, &s.mask);
        let logp = dist.log_prob(s.action);
        let log_ratio = logp - s.old_log_prob;
        let ratio = log_ratio.exp();
        let unclipped = ratio * s.advantage;
        let clipped = ratio.clamp(1.0 - coefs.clip_epsilon, 1.0 + coefs.clip_epsilon) * s.advantage;
        let surrogate = unclipped.min(clipped);
        let entropy = dist.entropy();
        let verr = cache.value - s.ret;

        stats.policy_loss -= surrogate / n;
        stats.value_loss += verr * verr / n;
        stats.entropy += entropy / n;
        stats.approx_kl += ((ratio - 1.0) - log_ratio) / n;
        if (ratio - 1.0).abs() > coefs.clip_epsilon {
            stats.clip_fraction += 1.0 / n;
        }

        if let Some(g) = grad.as_deref_mut() {
            // d(-surrogate)/d(logp); zero on the clipped branch.
            let dl_dlogp = if unclipped <= clipped { -ratio * s.advantage } else { 0.0 };
            let probs = dist.probs();
            let logps = dist.log_probs();
            for j in 0..dlogits.len() {
                if !s.mask[j] {
                    dlogits[j] = 0.0;
                    continue;
                }
                let onehot = if j == s.action { 1.0 } else { 0.0 };
                let d_policy = dl_dlogp * (onehot - probs[j]);
                let d_entropy = -probs[j] * (logps[j] + entropy);
                dlogits[j] = (d_policy - coefs.entropy_coef * d_entropy) / n;
            }
            let dvalue = coefs.value_coef * 2.0 * verr / n;
            net.backward(&cache, &dlogits, dvalue, g);
        }
    }
    stats.total = stats.policy_loss + coefs.value_coef * stats.value_loss - coefs.entropy_coef * stats.entropy;
    stats
}

/// Runs `epochs` passes of shuffled minibatches over a finished buffer.
/// Returns diagnostics averaged over all minibatches.
pub fn ppo_update<R: Rng + ?Sized>(
    buffer: &TrajectoryBuffer,
    net: &mut PolicyNetwork,
    opt: &mut Adam,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<LossStats> {
    let n = buffer.len();
    if buffer.advantages().len() != n || n == 0 {
        return Err(Error::LengthMismatch(
            "buffer must be finished (advantages computed) before an update".into(),
        ));
    }
    let coefs = LossCoefs {
        clip_epsilon: config.clip_epsilon,
        value_coef: config.value_coef,
        entropy_coef: config.entropy_coef,
    };
    let mut order: Vec<usize> = (0..n).collect();
    let mut grad = vec![0.0; net.n_params()];
    let mut acc = LossStats::default();
    let mut batches = 0usize;
    for _ in 0..config.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(config.minibatch_size) {
            let mut adv: Vec<f64> = chunk.iter().map(|&i| buffer.advantages()[i]).collect();
            normalize_advantages(&mut adv);
            let batch: Vec<LossSample> = chunk
                .iter()
                .zip(adv)
                .map(|(&i, a)| {
                    let t = &buffer.transitions[i];
                    LossSample {
                        obs: t.obs,
                        action: t.action,
                        old_log_prob: t.log_prob,
                        advantage: a,
                        ret: buffer.returns()[i],
                        mask: t.mask,
                    }
                })
                .collect();
            grad.iter_mut().for_each(|g| *g = 0.0);
            let stats = ppo_loss(net, &batch, &coefs, Some(&mut grad));
            if !stats.total.is_finite() {
                return Err(Error::NonFinite(format!(
                    "PPO loss {} (policy {}, value {}, entropy {})",
                    stats.total, stats.policy_loss, stats.value_loss, stats.entropy
                )));
            }
            clip_grad_norm(&mut grad, config.max_grad_norm);
            opt.step(net.params_mut(), &grad);
            acc.total += stats.total;
            acc.policy_loss += stats.policy_loss;
            acc.value_loss += stats.value_loss;
            acc.entropy += stats.entropy;
            acc.approx_kl += stats.approx_kl;
            acc.clip_fraction += stats.clip_fraction;
            batches += 1;
        }
    }
    if !net.is_finite() {
        return Err(Error::NonFinite("network parameters after update".into()));
    }
    let k = batches.max(1) as f64;
    Ok(LossStats {
        total: acc.total / k,
        policy_loss: acc.policy_loss / k,
        value_loss: acc.value_loss / k,
        entropy: acc.entropy / k,
        approx_kl: acc.approx_kl / k,
        clip_fraction: acc.clip_fraction / k,
    })
}
