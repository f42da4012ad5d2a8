//! Trust anchor and per-step social deltas from rating contrasts.

use serde::{Deserialize, Serialize};

use super::{rescale_rating, ResponseType, VignetteError, VignetteRecord};
use crate::social::{EtaSet, SocialConstants};

/// Mean trust rating mapped to `[0, 1]`.
pub fn compute_trust_anchor(records: &[VignetteRecord]) -> Result<f64, VignetteError> {
    if records.is_empty() {
        return Err(VignetteError::InsufficientData("no trust ratings".into()));
    }
    let sum: f64 = records.iter().map(|r| rescale_rating(r.trust as f64)).sum();
    Ok((sum / records.len() as f64).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EtaBounds {
    pub lo: f64,
    pub hi: f64,
}

impl Default for EtaBounds {
    fn default() -> Self {
        Self { lo: 0.0, hi: 0.25 }
    }
}

impl EtaBounds {
    /// Maps an effect in `[-1, 1]` linearly onto `[lo, hi]`; 0 lands on the
    /// midpoint.
    pub fn rescale(&self, effect: f64) -> f64 {
        let e = effect.clamp(-1.0, 1.0);
        self.lo + (self.hi - self.lo) * (1.0 + e) / 2.0
    }
}

/// Rating contrasts on the `[0, 1]` scale, each in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaEffects {
    /// Trust lost by complying, relative to the anchor.
    pub viol: f64,
    /// Trust gained by refusing with an explanation, relative to the anchor.
    pub expl: f64,
    /// Empathy of empathic refusals relative to the grand mean.
    pub emp: f64,
    /// Empathy of constructive refusals relative to the grand mean.
    pub cons: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedEta {
    pub eta: EtaSet,
    pub lambda_trust: f64,
    pub lambda_valence: f64,
    pub effects: EtaEffects,
}

fn group_mean(records: &[VignetteRecord], pick: impl Fn(&VignetteRecord) -> bool, item: fn(&VignetteRecord) -> u8) -> Option<f64> {
    let vals: Vec<f64> = records.iter().filter(|r| pick(r)).map(|r| rescale_rating(item(r) as f64)).collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Per-step deltas from response-type contrasts on trust and empathy.
///
/// Group means equal the coefficients of a dummy-coded regression, so the
/// contrasts below are those regression effects. The safe-outcome and
/// plain-refusal deltas and the leak rates have no vignette counterpart and
/// keep the supplied defaults.
pub fn derive_eta(records: &[VignetteRecord], bounds: &EtaBounds, defaults: &SocialConstants) -> Result<DerivedEta, VignetteError> {
    if !(bounds.lo <= bounds.hi) {
        return Err(VignetteError::InsufficientData(format!(
            "eta bounds [{}, {}] are inverted",
            bounds.lo, bounds.hi
        )));
    }
    let anchor = compute_trust_anchor(records)?;
    let trust = |t: ResponseType| group_mean(records, |r| r.response_type == t, |r| r.trust);
    let comply_trust = trust(ResponseType::Comply)
        .ok_or_else(|| VignetteError::InsufficientData("no comply responses".into()))?;
    let refusal_trust = group_mean(records, |r| r.response_type.is_refusal(), |r| r.trust)
        .ok_or_else(|| VignetteError::InsufficientData("no refusal responses".into()))?;
    let empathy_all = group_mean(records, |_| true, |r| r.empathy).expect("records are non-empty");
    let empathy = |t: ResponseType| {
        group_mean(records, |r| r.response_type == t, |r| r.empathy)
            .ok_or_else(|| VignetteError::InsufficientData(format!("no {t} responses")))
    };
    let effects = EtaEffects {
        viol: anchor - comply_trust,
        expl: refusal_trust - anchor,
        emp: empathy(ResponseType::EmpathicRefusal)? - empathy_all,
        cons: empathy(ResponseType::ConstructiveRefusal)? - empathy_all,
    };
    Ok(DerivedEta {
        eta: EtaSet {
            viol: bounds.rescale(effects.viol),
            expl: bounds.rescale(effects.expl),
            emp: bounds.rescale(effects.emp),
            cons: bounds.rescale(effects.cons),
            ..defaults.eta
        },
        lambda_trust: defaults.lambda_trust,
        lambda_valence: defaults.lambda_valence,
        effects,
    })
}
