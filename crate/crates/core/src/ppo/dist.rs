//! Action masks and the masked categorical distribution over logits.

use rand::Rng;

use crate::env::{Action, Observation, N_ACTIONS};

pub type ActionMask = [bool; N_ACTIONS];

pub const ALL_ALLOWED: ActionMask = [true; N_ACTIONS];

/// Which actions a policy may pick in the given state.
///
/// With `mask_unsafe_comply`, Comply is removed whenever the observed risk
/// reaches the observed threshold. `no_clarify_alt` removes Clarify and
/// ProposeAlternative. The refusal actions are never removed.
pub fn action_mask(obs: &Observation, mask_unsafe_comply: bool, no_clarify_alt: bool) -> ActionMask {
    let mut mask = ALL_ALLOWED;
    if mask_unsafe_comply && obs.p_hat >= obs.tau {
        mask[Action::Comply.index()] = false;
    }
    if no_clarify_alt {
        mask[Action::Clarify.index()] = false;
        mask[Action::ProposeAlternative.index()] = false;
    }
    mask
}

/// Softmax restricted to the allowed actions. Masked entries get probability
/// zero and log-probability `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedCategorical {
    probs: Vec<f64>,
    log_probs: Vec<f64>,
}

impl MaskedCategorical {
    /// Panics if no action is allowed.
    pub fn new(logits: &[f64], mask: &[bool]) -> Self {
        assert_eq!(logits.len(), mask.len());
        let max = logits
            .iter()
            .zip(mask)
            .filter(|(_, m)| **m)
            .map(|(l, _)| *l)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(max > f64::NEG_INFINITY, "mask leaves no allowed action");
        let sum: f64 = logits
            .iter()
            .zip(mask)
            .filter(|(_, m)| **m)
            .map(|(l, _)| (l - max).exp())
            .sum();
        let log_z = max + sum.ln();
        let log_probs: Vec<f64> = logits
            .iter()
            .zip(mask)
            .map(|(l, m)| if *m { l - log_z } else { f64::NEG_INFINITY })
            .collect();
        let probs = log_probs.iter().map(|lp| lp.exp()).collect();
        Self { probs, log_probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_prob(&self, idx: usize) -> f64 {
        self.log_probs[idx]
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn entropy(&self) -> f64 {
        self.probs
            .iter()
            .zip(&self.log_probs)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, lp)| -p * lp)
            .sum()
    }

    /// Highest-probability action; ties resolve to the lowest index.
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last_allowed = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > 0.0 {
                acc += p;
                last_allowed = i;
                if u < acc {
                    return i;
                }
            }
        }
        last_allowed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(p_hat: f64, tau: f64) -> Observation {
        Observation {
            p_hat,
            tau,
            valence: 0.5,
            arousal: 0.5,
            trust: 0.7,
            persona: [0.5; 4],
        }
    }

    #[test]
    fn mask_examples() {
        let m = action_mask(&obs(0.9, 0.5), true, false);
        assert!(!m[0]);
        assert!(m[1..].iter().all(|x| *x));
        let d = MaskedCategorical::new(&[0.3, 0.1, -0.2, 0.0, 0.5, 1.0, -1.0], &m);
        assert_eq!(d.probs()[0], 0.0);
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);

        assert_eq!(action_mask(&obs(0.1, 0.5), true, false), ALL_ALLOWED);
        assert_eq!(action_mask(&obs(0.9, 0.5), false, false), ALL_ALLOWED);
        let m = action_mask(&obs(0.9, 0.5), true, true);
        assert_eq!(m, [false, true, true, true, true, false, false]);
    }

    #[test]
    fn entropy_of_uniform() {
        let d = MaskedCategorical::new(&[0.0; 4], &[true, true, false, true]);
        assert!((d.entropy() - 3f64.ln()).abs() < 1e-12);
        assert_eq!(d.mode(), 0);
    }
}
