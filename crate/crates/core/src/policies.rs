//! Rule-based reference policies and the policy interface shared with
//! learned agents.

use serde::{Deserialize, Serialize};

use crate::env::{Action, Observation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyDecision {
    pub action: Action,
    /// Score in `[0, 1]` used by calibration metrics, when the policy has one.
    pub refusal_probability: Option<f64>,
}

impl PolicyDecision {
    pub fn new(action: Action, refusal_probability: Option<f64>) -> Self {
        Self {
            action,
            refusal_probability: refusal_probability.map(|p| p.clamp(0.0, 1.0)),
        }
    }
}

/// Anything that maps observations to actions.
///
/// `reset` is called at the start of every episode so stateful (e.g.
/// recurrent) policies can clear their memory. `fork` produces an independent
/// copy for a parallel evaluation worker.
pub trait Policy: Send {
    fn name(&self) -> String;

    fn act(&mut self, obs: &Observation, deterministic: bool) -> PolicyDecision;

    fn reset(&mut self) {}

    fn fork(&self) -> Box<dyn Policy>;
}

pub fn always_comply(_obs: &Observation) -> PolicyDecision {
    PolicyDecision::new(Action::Comply, Some(0.0))
}

pub fn risk_refusal(obs: &Observation, tau0: f64) -> PolicyDecision {
    let action = if obs.p_hat >= tau0 {
        Action::RefuseExplain
    } else {
        Action::Comply
    };
    PolicyDecision::new(action, Some(obs.p_hat))
}

/// Refuses at the observed dynamic threshold; empathic below neutral valence,
/// constructive otherwise.
pub fn valence_threshold(obs: &Observation, valence_split: f64) -> PolicyDecision {
    let action = if obs.p_hat >= obs.tau {
        if obs.valence < valence_split {
            Action::RefuseExplainEmpathic
        } else {
            Action::RefuseExplainConstructive
        }
    } else {
        Action::Comply
    };
    PolicyDecision::new(action, Some(obs.p_hat))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StyleOffsets {
    pub empathic: f64,
    pub constructive: f64,
}

/// Logistic refusal gate fitted on vignette ratings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VignetteGateModel {
    pub risk_mean: f64,
    pub risk_std: f64,
    pub intercept: f64,
    pub slope: f64,
    pub style_offsets: StyleOffsets,
    pub gate: f64,
}

impl VignetteGateModel {
    pub fn new(
        risk_mean: f64,
        risk_std: f64,
        intercept: f64,
        slope: f64,
        style_offsets: StyleOffsets,
    ) -> Result<Self> {
        if !(risk_std > 0.0) || !risk_std.is_finite() {
            return Err(Error::Config(format!(
                "vignette gate needs risk_std > 0 (got {risk_std})"
            )));
        }
        Ok(Self {
            risk_mean,
            risk_std,
            intercept,
            slope,
            style_offsets,
            gate: 0.5,
        })
    }

    pub fn refusal_probability(&self, p_hat: f64) -> f64 {
        let z = (p_hat - self.risk_mean) / self.risk_std;
        sigmoid(self.intercept + self.slope * z)
    }

    /// Empathic only when its offset is strictly larger; ties go constructive.
    pub fn style(&self) -> Action {
        if self.style_offsets.empathic > self.style_offsets.constructive {
            Action::RefuseExplainEmpathic
        } else {
            Action::RefuseExplainConstructive
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn vignette_gate(obs: &Observation, model: &VignetteGateModel) -> PolicyDecision {
    let prob = model.refusal_probability(obs.p_hat);
    let action = if prob >= model.gate {
        model.style()
    } else {
        Action::Comply
    };
    PolicyDecision::new(action, Some(prob))
}

/// Picks the risk threshold in `{0.1, ..., 0.9}` with the best F1 against
/// binary refusal labels. Ties keep the lower threshold.
pub fn tune_risk_threshold(scores: &[f64], labels: &[bool]) -> f64 {
    let mut best = (f64::NEG_INFINITY, 0.5);
    for k in 1..=9 {
        let t = k as f64 / 10.0;
        let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
        for (s, y) in scores.iter().zip(labels) {
            match (*s >= t, *y) {
                (true, true) => tp += 1.0,
                (true, false) => fp += 1.0,
                (false, true) => fn_ += 1.0,
                _ => {}
            }
        }
        let f1 = if tp > 0.0 { 2.0 * tp / (2.0 * tp + fp + fn_) } else { 0.0 };
        if f1 > best.0 {
            best = (f1, t);
        }
    }
    best.1
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysComply;

impl Policy for AlwaysComply {
    fn name(&self) -> String {
        "AC".into()
    }
    fn act(&mut self, obs: &Observation, _deterministic: bool) -> PolicyDecision {
        always_comply(obs)
    }
    fn fork(&self) -> Box<dyn Policy> {
        Box::new(*self)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RiskRefusal {
    pub tau0: f64,
}

impl Default for RiskRefusal {
    fn default() -> Self {
        Self { tau0: 0.5 }
    }
}

impl Policy for RiskRefusal {
    fn name(&self) -> String {
        "RR".into()
    }
    fn act(&mut self, obs: &Observation, _deterministic: bool) -> PolicyDecision {
        risk_refusal(obs, self.tau0)
    }
    fn fork(&self) -> Box<dyn Policy> {
        Box::new(*self)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValenceThreshold {
    pub valence_split: f64,
}

impl Default for ValenceThreshold {
    fn default() -> Self {
        Self { valence_split: 0.5 }
    }
}

impl Policy for ValenceThreshold {
    fn name(&self) -> String {
        "VT".into()
    }
    fn act(&mut self, obs: &Observation, _deterministic: bool) -> PolicyDecision {
        valence_threshold(obs, self.valence_split)
    }
    fn fork(&self) -> Box<dyn Policy> {
        Box::new(*self)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VignetteGate {
    pub model: VignetteGateModel,
}

impl Policy for VignetteGate {
    fn name(&self) -> String {
        "VG".into()
    }
    fn act(&mut self, obs: &Observation, _deterministic: bool) -> PolicyDecision {
        vignette_gate(obs, &self.model)
    }
    fn fork(&self) -> Box<dyn Policy> {
        Box::new(*self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn obs(p_hat: f64, tau: f64, valence: f64) -> Observation {
        Observation {
            p_hat,
            tau,
            valence,
            arousal: 0.5,
            trust: 0.7,
            persona: [0.5, 0.4, 0.5, 0.8],
        }
    }

    fn gate(intercept: f64, slope: f64, emp: f64, cons: f64) -> VignetteGateModel {
        VignetteGateModel::new(
            0.5,
            0.2,
            intercept,
            slope,
            StyleOffsets {
                empathic: emp,
                constructive: cons,
            },
        )
        .unwrap()
    }

    #[test]
    fn ac_always_complies() {
        for p in [0.0, 0.5, 0.99] {
            assert_eq!(always_comply(&obs(p, 0.5, 0.5)).action, Action::Comply);
        }
    }

    #[test]
    fn rr_examples() {
        assert_eq!(risk_refusal(&obs(0.9, 0.5, 0.5), 0.5).action, Action::RefuseExplain);
        assert_eq!(risk_refusal(&obs(0.1, 0.5, 0.5), 0.5).action, Action::Comply);
        for p in [0.0, 0.3, 1.0] {
            assert!(risk_refusal(&obs(p, 0.5, 0.5), 0.0).action.is_refusal());
        }
    }

    #[test]
    fn vt_examples() {
        assert_eq!(
            valence_threshold(&obs(0.8, 0.5, 0.2), 0.5).action,
            Action::RefuseExplainEmpathic
        );
        assert_eq!(
            valence_threshold(&obs(0.8, 0.5, 0.8), 0.5).action,
            Action::RefuseExplainConstructive
        );
        assert_eq!(valence_threshold(&obs(0.3, 0.5, 0.5), 0.5).action, Action::Comply);
    }

    #[test]
    fn vg_examples() {
        // z = 0 with zero intercept sits exactly on the gate.
        let d = vignette_gate(&obs(0.5, 0.5, 0.5), &gate(0.0, 2.0, 0.0, 0.0));
        assert_eq!(d.refusal_probability, Some(0.5));
        assert!(d.action.is_refusal());
        assert_eq!(d.action, Action::RefuseExplainConstructive);

        let far = gate(0.0, 50.0, 1.0, 0.0);
        let d = vignette_gate(&obs(1.0, 0.5, 0.5), &far);
        assert!(d.refusal_probability.unwrap() > 0.999_999);
        assert_eq!(d.action, Action::RefuseExplainEmpathic);

        assert!(VignetteGateModel::new(0.5, 0.0, 0.0, 1.0, StyleOffsets {
            empathic: 0.0,
            constructive: 0.0
        })
        .is_err());
    }

    #[test]
    fn tuning_finds_separating_threshold() {
        let scores: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let labels: Vec<bool> = scores.iter().map(|s| *s >= 0.6).collect();
        assert_eq!(tune_risk_threshold(&scores, &labels), 0.6);
    }

    proptest! {
        #[test]
        fn refusal_monotone_in_risk(
            a in 0.0f64..=1.0, b in 0.0f64..=1.0,
            tau in 0.0f64..=1.0, v in 0.0f64..=1.0, slope in 0.01f64..10.0,
        ) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let g = gate(0.3, slope, 0.0, 0.1);
            prop_assert!(risk_refusal(&obs(lo, tau, v), tau).action.is_refusal() as u8
                <= risk_refusal(&obs(hi, tau, v), tau).action.is_refusal() as u8);
            prop_assert!(valence_threshold(&obs(lo, tau, v), 0.5).action.is_refusal() as u8
                <= valence_threshold(&obs(hi, tau, v), 0.5).action.is_refusal() as u8);
            prop_assert!(vignette_gate(&obs(lo, tau, v), &g).action.is_refusal() as u8
                <= vignette_gate(&obs(hi, tau, v), &g).action.is_refusal() as u8);
            if hi - lo > 1e-6 {
                prop_assert!(g.refusal_probability(lo) < g.refusal_probability(hi));
            }
        }

        #[test]
        fn rr_and_vt_agree_at_fixed_threshold(p in 0.0f64..=1.0, tau in 0.0f64..=1.0, v in 0.0f64..=1.0) {
            let o = obs(p, tau, v);
            prop_assert_eq!(
                risk_refusal(&o, tau).action.is_refusal(),
                valence_threshold(&o, 0.5).action.is_refusal()
            );
        }
    }
}
