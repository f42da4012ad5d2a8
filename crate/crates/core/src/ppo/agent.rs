use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dist::{action_mask, MaskedCategorical};
use super::network::PolicyNetwork;
use super::Variant;
use crate::env::{Action, Observation};
use crate::policies::{Policy, PolicyDecision};

/// A trained network wrapped in the common policy interface.
///
/// The refusal probability reported for calibration is the total mass on the
/// four refusal actions.
#[derive(Debug, Clone)]
pub struct PpoPolicy {
    net: PolicyNetwork,
    variant: Variant,
    no_clarify_alt: bool,
    rng: ChaCha8Rng,
}

impl PpoPolicy {
    pub fn new(net: PolicyNetwork, variant: Variant, no_clarify_alt: bool, seed: u64) -> Self {
        Self {
            net,
            variant,
            no_clarify_alt,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn network(&self) -> &PolicyNetwork {
        &self.net
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn distribution(&self, obs: &Observation) -> MaskedCategorical {
        let mask = action_mask(obs, self.variant.masks_unsafe_comply(), self.no_clarify_alt);
        let (logits, _) = self.net.forward(&obs.to_array());
        MaskedCategorical::new(&logits, &mask)
    }
}

impl Policy for PpoPolicy {
    fn name(&self) -> String {
        match self.variant {
            Variant::Vanilla => "PPO".into(),
            Variant::Masked => "Masked PPO".into(),
            Variant::Lagrangian => "Lagrangian PPO".into(),
        }
    }

    fn act(&mut self, obs: &Observation, deterministic: bool) -> PolicyDecision {
        let dist = self.distribution(obs);
        let idx = if deterministic {
            dist.mode()
        } else {
            dist.sample(&mut self.rng)
        };
        let refusal: f64 = Action::ALL
            .iter()
            .filter(|a| a.is_refusal())
            .map(|a| dist.probs()[a.index()])
            .sum();
        PolicyDecision::new(Action::ALL[idx], Some(refusal))
    }

    fn fork(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}
