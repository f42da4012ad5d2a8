//! Social state of the simulated human partner.
//!
//! Trust and valence follow leaky first-order updates driven by the outcome
//! of each step (safe execution, violation) and by the refusal style the
//! robot used. The refusal threshold rises as trust or valence fall.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SocialState {
    pub trust: f64,
    pub valence: f64,
    pub arousal: f64,
}

impl SocialState {
    pub fn new(trust: f64, valence: f64, arousal: f64) -> Self {
        Self {
            trust: clip01(trust),
            valence: clip01(valence),
            arousal: clip01(arousal),
        }
    }
}

/// Per-step trust/valence deltas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaSet {
    pub safe: f64,
    pub viol: f64,
    pub expl: f64,
    pub emp: f64,
    pub cons: f64,
    pub plain: f64,
}

impl Default for EtaSet {
    fn default() -> Self {
        Self {
            safe: 0.05,
            viol: 0.25,
            expl: 0.03,
            emp: 0.04,
            cons: 0.05,
            plain: 0.04,
        }
    }
}

impl EtaSet {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            safe: clip01(self.safe * factor),
            viol: clip01(self.viol * factor),
            expl: clip01(self.expl * factor),
            emp: clip01(self.emp * factor),
            cons: clip01(self.cons * factor),
            plain: clip01(self.plain * factor),
        }
    }

    fn values(&self) -> [f64; 6] {
        [self.safe, self.viol, self.expl, self.emp, self.cons, self.plain]
    }
}

/// Coefficients of the threshold, leak and hinge equations.
///
/// The couplings may go negative under stress-test overrides; the threshold
/// is clipped only after the couplings are applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SocialConstants {
    pub tau0: f64,
    pub c_trust: f64,
    pub c_val: f64,
    #[serde(rename = "lambda_T")]
    pub lambda_trust: f64,
    #[serde(rename = "lambda_V")]
    pub lambda_valence: f64,
    pub eta: EtaSet,
    pub t_star: f64,
    pub band_halfwidth: f64,
}

impl Default for SocialConstants {
    fn default() -> Self {
        Self {
            tau0: 0.5,
            c_trust: 0.3,
            c_val: 0.12,
            lambda_trust: 0.02,
            lambda_valence: 0.02,
            eta: EtaSet::default(),
            t_star: 0.70,
            band_halfwidth: 0.10,
        }
    }
}

impl SocialConstants {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} = {v} must lie in [0, 1]")))
            }
        };
        unit("tau0", self.tau0)?;
        unit("lambda_T", self.lambda_trust)?;
        unit("lambda_V", self.lambda_valence)?;
        unit("t_star", self.t_star)?;
        for (name, v) in ["eta.safe", "eta.viol", "eta.expl", "eta.emp", "eta.cons", "eta.plain"]
            .iter()
            .zip(self.eta.values())
        {
            unit(name, v)?;
        }
        if !self.c_trust.is_finite() || !self.c_val.is_finite() {
            return Err(Error::Config("couplings must be finite".into()));
        }
        if !(self.band_halfwidth >= 0.0) {
            return Err(Error::Config("band_halfwidth must be non-negative".into()));
        }
        Ok(())
    }

    /// Hinge band `(low, high)` around the trust anchor, clipped to `[0, 1]`.
    pub fn band(&self) -> (f64, f64) {
        (
            clip01(self.t_star - self.band_halfwidth),
            clip01(self.t_star + self.band_halfwidth),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefusalStyle {
    Plain,
    Explain,
    Empathic,
    Constructive,
}

/// Outcome and style indicators for one step.
///
/// At most one refusal style is active, and `safe`/`viol` are exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StyleIndicators {
    safe: bool,
    viol: bool,
    style: Option<RefusalStyle>,
}

impl StyleIndicators {
    pub fn new(safe: bool, viol: bool, style: Option<RefusalStyle>) -> Result<Self> {
        if safe && viol {
            return Err(Error::Config(
                "safe and violation indicators are mutually exclusive".into(),
            ));
        }
        Ok(Self { safe, viol, style })
    }

    /// Builds indicators from raw flags, rejecting more than one active style.
    pub fn from_flags(
        safe: bool,
        viol: bool,
        plain: bool,
        expl: bool,
        emp: bool,
        cons: bool,
    ) -> Result<Self> {
        let styles = [
            (plain, RefusalStyle::Plain),
            (expl, RefusalStyle::Explain),
            (emp, RefusalStyle::Empathic),
            (cons, RefusalStyle::Constructive),
        ];
        let mut active = styles.iter().filter(|(on, _)| *on).map(|(_, s)| *s);
        let style = active.next();
        if active.next().is_some() {
            return Err(Error::Config("at most one refusal style may be active".into()));
        }
        Self::new(safe, viol, style)
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn safe(&self) -> bool {
        self.safe
    }
    pub fn viol(&self) -> bool {
        self.viol
    }
    pub fn style(&self) -> Option<RefusalStyle> {
        self.style
    }
    pub fn plain(&self) -> bool {
        self.style == Some(RefusalStyle::Plain)
    }
    pub fn emp(&self) -> bool {
        self.style == Some(RefusalStyle::Empathic)
    }
    pub fn cons(&self) -> bool {
        self.style == Some(RefusalStyle::Constructive)
    }

    /// Any explanatory refusal (neutral, empathic or constructive).
    pub fn explanatory(&self) -> bool {
        matches!(
            self.style,
            Some(RefusalStyle::Explain | RefusalStyle::Empathic | RefusalStyle::Constructive)
        )
    }
}

#[inline]
pub fn clip01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Dynamic refusal threshold: `clip(tau0 + c_trust(1 - trust) + c_val(1 - valence))`.
pub fn compute_threshold(constants: &SocialConstants, state: &SocialState) -> f64 {
    clip01(
        constants.tau0
            + constants.c_trust * (1.0 - state.trust)
            + constants.c_val * (1.0 - state.valence),
    )
}

pub fn update_trust(
    state: &SocialState,
    ind_: &StyleIndicators,
    constants: &SocialConstants,
) -> f64 {
    let eta = &constants.eta;
    clip01(
        (1.0 - constants.lambda_trust) * state.trust + eta.safe * ind(ind_.safe())
            - eta.viol * ind(ind_.viol())
            + eta.expl * ind(ind_.explanatory()),
    )
}

pub fn update_affect(
    state: &SocialState,
    ind_: &StyleIndicators,
    constants: &SocialConstants,
) -> f64 {
    let eta = &constants.eta;
    clip01(
        (1.0 - constants.lambda_valence) * state.valence
            + eta.emp * ind(ind_.emp())
            + eta.cons * ind(ind_.cons())
            - eta.plain * ind(ind_.plain()),
    )
}

/// Zero outside the band `[t_star - w, t_star + w]`, linear distance otherwise.
pub fn trust_hinge(trust: f64, constants: &SocialConstants) -> f64 {
    let (low, high) = constants.band();
    0.0f64.max(low - trust).max(trust - high)
}

/// Arousal reverts toward the persona's impatience; `noise_scale = 0` makes
/// the update deterministic and leaves `rng` untouched.
pub fn update_arousal<R: Rng + ?Sized>(
    arousal: f64,
    persona_impatience: f64,
    noise_scale: f64,
    rng: &mut R,
) -> f64 {
    let eps = if noise_scale > 0.0 {
        Normal::new(0.0, noise_scale)
            .map(|n| n.sample(rng))
            .unwrap_or(0.0)
    } else {
        0.0
    };
    clip01(0.9 * arousal + 0.1 * persona_impatience + eps)
}

/// Applies one step of trust/valence/arousal dynamics.
pub fn advance<R: Rng + ?Sized>(
    state: &SocialState,
    indicators: &StyleIndicators,
    constants: &SocialConstants,
    impatience: f64,
    arousal_noise: f64,
    rng: &mut R,
) -> SocialState {
    SocialState {
        trust: update_trust(state, indicators, constants),
        valence: update_affect(state, indicators, constants),
        arousal: update_arousal(state.arousal, impatience, arousal_noise, rng),
    }
}
