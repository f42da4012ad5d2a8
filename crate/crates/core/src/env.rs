//! The refusal environment.
//!
//! Each step presents one command with a hidden true risk `p`. The agent sees
//! a noisy estimate `p_hat` and the partner's current threshold `tau`, then
//! complies, refuses in one of four styles, asks for clarification, or
//! proposes an alternative. The social state evolves after every step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::personas::{self, PersonaProfile, Stressor};
use crate::social::{
    self, clip01, compute_threshold, trust_hinge, RefusalStyle, SocialConstants, SocialState,
    StyleIndicators,
};

pub const OBS_DIM: usize = 9;
pub const N_ACTIONS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
#[repr(u8)]
pub enum Action {
    Comply = 0,
    RefusePlain = 1,
    RefuseExplain = 2,
    RefuseExplainEmpathic = 3,
    RefuseExplainConstructive = 4,
    Clarify = 5,
    ProposeAlternative = 6,
}

impl Action {
    pub const ALL: [Action; N_ACTIONS] = [
        Action::Comply,
        Action::RefusePlain,
        Action::RefuseExplain,
        Action::RefuseExplainEmpathic,
        Action::RefuseExplainConstructive,
        Action::Clarify,
        Action::ProposeAlternative,
    ];

    pub fn from_code(code: i64) -> Result<Self> {
        usize::try_from(code)
            .ok()
            .and_then(|i| Self::ALL.get(i).copied())
            .ok_or(Error::InvalidAction(code))
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_refusal(self) -> bool {
        matches!(self.code(), 1..=4)
    }

    pub fn is_explanatory(self) -> bool {
        matches!(self.code(), 2..=4)
    }

    pub fn refusal_style(self) -> Option<RefusalStyle> {
        match self {
            Action::RefusePlain => Some(RefusalStyle::Plain),
            Action::RefuseExplain => Some(RefusalStyle::Explain),
            Action::RefuseExplainEmpathic => Some(RefusalStyle::Empathic),
            Action::RefuseExplainConstructive => Some(RefusalStyle::Constructive),
            _ => None,
        }
    }
}

impl From<Action> for u8 {
    fn from(a: Action) -> u8 {
        a.code()
    }
}

impl TryFrom<u8> for Action {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Action::from_code(v as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub p: f64,
    pub risky: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub p_hat: f64,
    pub tau: f64,
    pub valence: f64,
    pub arousal: f64,
    pub trust: f64,
    pub persona: [f64; 4],
}

impl Observation {
    pub fn to_array(&self) -> [f64; OBS_DIM] {
        let [a, b, c, d] = self.persona;
        [
            self.p_hat,
            self.tau,
            self.valence,
            self.arousal,
            self.trust,
            a,
            b,
            c,
            d,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != OBS_DIM {
            return Err(Error::ShapeMismatch {
                expected: OBS_DIM,
                got: v.len(),
            });
        }
        Ok(Self {
            p_hat: v[0],
            tau: v[1],
            valence: v[2],
            arousal: v[3],
            trust: v[4],
            persona: [v[5], v[6], v[7], v[8]],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    pub w_task: f64,
    pub w_safety: f64,
    pub w_blame: f64,
    pub w_trust: f64,
    pub w_refuse: f64,
    pub w_explain: f64,
    pub w_clarify: f64,
    pub w_alt: f64,
    pub w_style: f64,
    pub w_just: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            w_task: 0.6,
            w_safety: 1.0,
            w_blame: 1.0,
            w_trust: 0.3,
            w_refuse: 0.05,
            w_explain: 0.05,
            w_clarify: 0.02,
            w_alt: 0.05,
            w_style: 0.05,
            w_just: 0.2,
        }
    }
}

impl RewardWeights {
    fn social(&self) -> [f64; 7] {
        [
            self.w_trust,
            self.w_refuse,
            self.w_explain,
            self.w_clarify,
            self.w_alt,
            self.w_style,
            self.w_just,
        ]
    }

    /// Non-negative weights ordered safety > task > every social term.
    pub fn validate(&self) -> Result<()> {
        let all = [self.w_task, self.w_safety, self.w_blame];
        if all.iter().chain(self.social().iter()).any(|w| !(*w >= 0.0)) {
            return Err(Error::Config("reward weights must be non-negative".into()));
        }
        let max_social = self.social().into_iter().fold(0.0, f64::max);
        if !(self.w_safety > self.w_task && self.w_task > max_social) {
            return Err(Error::Config(format!(
                "reward weights must satisfy w_safety > w_task > social terms \
                 (got {} / {} / {max_social})",
                self.w_safety, self.w_task
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurriculumConfig {
    pub warmup_fraction: f64,
    pub start_scale: f64,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        Self {
            warmup_fraction: 0.3,
            start_scale: 0.6,
        }
    }
}

impl CurriculumConfig {
    pub fn scale(&self, step: u64, total_steps: u64, enabled: bool) -> f64 {
        if !enabled || total_steps == 0 {
            return 1.0;
        }
        let warmup = self.warmup_fraction * total_steps as f64;
        if warmup <= 0.0 {
            return 1.0;
        }
        let frac = (step as f64 / warmup).min(1.0);
        self.start_scale + (1.0 - self.start_scale) * frac
    }
}

/// Linear warmup of the safety and blame weights from 0.6 to 1.0 over the
/// first 30% of training.
pub fn curriculum_scale(step: u64, total_steps: u64, enabled: bool) -> f64 {
    CurriculumConfig::default().scale(step, total_steps, enabled)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ablations {
    pub no_affect: bool,
    pub no_clarify_alt: bool,
    pub no_trust_penalty: bool,
    pub no_curriculum: bool,
}

impl Ablations {
    pub fn action_allowed(&self, action: Action) -> bool {
        !(self.no_clarify_alt && matches!(action, Action::Clarify | Action::ProposeAlternative))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    /// Catalog persona name; ignored when `profile` is set.
    pub persona: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<PersonaProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stressor: Option<Stressor>,
    pub horizon: u32,
    pub risky_fraction: f64,
    pub kappa: f64,
    pub arousal_noise: f64,
    pub weights: RewardWeights,
    pub constants: SocialConstants,
    pub curriculum: CurriculumConfig,
    pub ablations: Ablations,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            persona: "Balanced".into(),
            profile: None,
            stressor: None,
            horizon: 40,
            risky_fraction: 0.5,
            kappa: 0.5,
            arousal_noise: 0.02,
            weights: RewardWeights::default(),
            constants: SocialConstants::default(),
            curriculum: CurriculumConfig::default(),
            ablations: Ablations::default(),
            seed: 0,
        }
    }
}

impl EnvConfig {
    pub fn with_persona(mut self, name: &str) -> Self {
        self.persona = name.to_string();
        self.profile = None;
        self
    }

    pub fn with_stressor(mut self, stressor: Option<Stressor>) -> Self {
        self.stressor = stressor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::Config(format!("kappa = {} must lie in (0, 1)", self.kappa)));
        }
        if !(0.0..=1.0).contains(&self.risky_fraction) {
            return Err(Error::Config(format!(
                "risky_fraction = {} must lie in [0, 1]",
                self.risky_fraction
            )));
        }
        if !(self.arousal_noise >= 0.0) {
            return Err(Error::Config("arousal_noise must be non-negative".into()));
        }
        self.weights.validate()?;
        self.constants.validate()
    }

    /// Persona profile after applying the configured stressor.
    pub fn resolve_profile(&self) -> Result<PersonaProfile> {
        let base = match &self.profile {
            Some(p) => {
                p.traits.validate()?;
                p.clone()
            }
            None => personas::traits_to_profile(&personas::find_persona(&self.persona)?)?,
        };
        Ok(match &self.stressor {
            Some(s) => personas::apply_stressor(&base, s),
            None => base,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: EnvConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Social constants with the persona's couplings, leak rates and eta scale.
pub fn effective_constants(base: &SocialConstants, profile: &PersonaProfile) -> SocialConstants {
    SocialConstants {
        c_trust: profile.c_trust,
        c_val: profile.c_val,
        lambda_trust: clip01(profile.lambda_trust),
        lambda_valence: clip01(profile.lambda_valence),
        eta: base.eta.scaled(profile.eta_scale),
        ..*base
    }
}

pub fn sample_command<R: Rng + ?Sized>(rng: &mut R, risky_fraction: f64) -> Command {
    let risky = rng.random::<f64>() < risky_fraction;
    let u = rng.random::<f64>();
    let p = if risky { 0.5 + 0.5 * u } else { 0.5 * u };
    Command { p, risky }
}

pub fn perceive_risk<R: Rng + ?Sized>(p: f64, sigma: f64, rng: &mut R) -> f64 {
    if sigma > 0.0 {
        let eps = Normal::new(0.0, sigma).expect("finite sigma").sample(rng);
        clip01(p + eps)
    } else {
        p
    }
}

pub fn apply_clarify(sigma: f64, kappa: f64) -> f64 {
    kappa * sigma
}

/// Refusal is justified iff the true risk meets the current threshold.
pub fn oracle_label(p: f64, tau: f64) -> bool {
    p >= tau
}

/// Training-time stand-in for vignette blame.
pub fn blame_proxy(violation: bool, p: f64) -> f64 {
    if violation {
        0.5 + 0.5 * p
    } else {
        0.0
    }
}

/// Everything the reward needs to know about one transition.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TransitionFacts {
    pub progress: f64,
    pub violation: bool,
    pub blame: f64,
    pub trust: f64,
    pub refuse: bool,
    pub explain: bool,
    pub clarify: bool,
    pub alt: bool,
    pub emp: bool,
    pub cons: bool,
    pub risky: bool,
}

/// Shaped reward. `safety_scale` is the curriculum multiplier applied to the
/// safety and blame weights.
pub fn compute_reward(
    facts: &TransitionFacts,
    weights: &RewardWeights,
    constants: &SocialConstants,
    safety_scale: f64,
) -> f64 {
    let i = |b: bool| if b { 1.0 } else { 0.0 };
    let style = i(facts.emp) + i(facts.cons);
    weights.w_task * facts.progress
        - safety_scale * weights.w_safety * i(facts.violation)
        - safety_scale * weights.w_blame * facts.blame
        - weights.w_trust * trust_hinge(facts.trust, constants)
        - weights.w_refuse * i(facts.refuse)
        + weights.w_explain * i(facts.explain)
        - weights.w_clarify * i(facts.clarify)
        + weights.w_alt * i(facts.alt)
        + weights.w_style * style
        + weights.w_just * i(facts.refuse && facts.risky)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub action: Action,
    pub risky: bool,
    pub violation: bool,
    pub refusal: bool,
    pub justified: bool,
    pub complied: bool,
    /// Oracle label: refusal justified given `p` and `tau`.
    pub oracle: bool,
    pub p: f64,
    pub p_hat: f64,
    pub tau: f64,
    pub trust: f64,
    pub valence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub cost: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResetInfo {
    pub persona: String,
    pub stressor: Option<String>,
    pub sigma: f64,
    pub p_viol: f64,
}

/// A single environment instance. Owns its RNG; not shared across threads.
#[derive(Debug, Clone)]
pub struct EedEnv {
    config: EnvConfig,
    profile: PersonaProfile,
    constants: SocialConstants,
    weights: RewardWeights,
    rng: ChaCha8Rng,
    social: SocialState,
    sigma: f64,
    command: Command,
    p_hat: f64,
    tau: f64,
    t: u32,
    done: bool,
    safety_scale: f64,
}

impl EedEnv {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let profile = config.resolve_profile()?;
        let constants = effective_constants(&config.constants, &profile);
        let mut weights = config.weights;
        if config.ablations.no_trust_penalty {
            weights.w_trust = 0.0;
        }
        let mut env = Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            social: SocialState::new(constants.t_star, 0.5, profile.traits.impatience),
            sigma: profile.sigma0,
            command: Command { p: 0.0, risky: false },
            p_hat: 0.0,
            tau: constants.tau0,
            t: 0,
            done: true,
            safety_scale: 1.0,
            config,
            profile,
            constants,
            weights,
        };
        env.reset(env.config.seed);
        Ok(env)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn profile(&self) -> &PersonaProfile {
        &self.profile
    }

    pub fn constants(&self) -> &SocialConstants {
        &self.constants
    }

    pub fn social(&self) -> &SocialState {
        &self.social
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn command(&self) -> Command {
        self.command
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Curriculum multiplier for the safety and blame weights.
    pub fn set_safety_scale(&mut self, scale: f64) {
        self.safety_scale = scale;
    }

    pub fn reset(&mut self, seed: u64) -> (Observation, ResetInfo) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.social = SocialState::new(self.constants.t_star, 0.5, self.profile.traits.impatience);
        self.sigma = self.profile.sigma0;
        self.t = 0;
        self.done = false;
        self.next_command();
        let info = ResetInfo {
            persona: self.profile.traits.name.clone(),
            stressor: self.config.stressor.as_ref().map(|s| s.name.clone()),
            sigma: self.sigma,
            p_viol: self.profile.p_viol,
        };
        (self.observation(), info)
    }

    fn next_command(&mut self) {
        self.command = sample_command(&mut self.rng, self.config.risky_fraction);
        self.p_hat = perceive_risk(self.command.p, self.sigma, &mut self.rng);
        self.tau = compute_threshold(&self.constants, &self.social);
    }

    pub fn observation(&self) -> Observation {
        let (valence, arousal) = if self.config.ablations.no_affect {
            (0.0, 0.0)
        } else {
            (self.social.valence, self.social.arousal)
        };
        Observation {
            p_hat: self.p_hat,
            tau: self.tau,
            valence,
            arousal,
            trust: self.social.trust,
            persona: self.profile.traits.as_array(),
        }
    }

    pub fn action_allowed(&self, action: Action) -> bool {
        self.config.ablations.action_allowed(action)
    }

    pub fn step_code(&mut self, code: i64) -> Result<StepResult> {
        self.step(Action::from_code(code)?)
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        if !self.action_allowed(action) {
            return Err(Error::MaskedAction(action));
        }
        let Command { p, risky } = self.command;
        let (p_hat, tau) = (self.p_hat, self.tau);
        let horizon = self.config.horizon as f64;
        let oracle = oracle_label(p, tau);

        let complied = action == Action::Comply;
        let alt = action == Action::ProposeAlternative;
        let violation = complied && risky && self.rng.random::<f64>() < self.profile.p_viol;
        let progress = match action {
            Action::Comply if !violation => 1.0 / horizon,
            Action::ProposeAlternative => 0.5 / horizon,
            _ => 0.0,
        };
        if action == Action::Clarify {
            self.sigma = apply_clarify(self.sigma, self.config.kappa);
        }

        let indicators = StyleIndicators::new(
            (complied && !violation) || alt,
            violation,
            action.refusal_style(),
        )?;
        self.social = social::advance(
            &self.social,
            &indicators,
            &self.constants,
            self.profile.traits.impatience,
            self.config.arousal_noise,
            &mut self.rng,
        );

        let facts = TransitionFacts {
            progress,
            violation,
            blame: blame_proxy(violation, p),
            trust: self.social.trust,
            refuse: action.is_refusal(),
            explain: action.is_explanatory(),
            clarify: action == Action::Clarify,
            alt,
            emp: indicators.emp(),
            cons: indicators.cons(),
            risky,
        };
        let reward = compute_reward(&facts, &self.weights, &self.constants, self.safety_scale);

        self.t += 1;
        let truncated = self.t >= self.config.horizon;
        self.done = truncated;
        self.next_command();

        Ok(StepResult {
            observation: self.observation(),
            reward,
            cost: if violation { 1.0 } else { 0.0 },
            terminated: false,
            truncated,
            info: StepInfo {
                action,
                risky,
                violation,
                refusal: action.is_refusal(),
                justified: action.is_refusal() && oracle,
                complied,
                oracle,
                p,
                p_hat,
                tau,
                trust: self.social.trust,
                valence: self.social.valence,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn env_with(f: impl FnOnce(&mut EnvConfig)) -> EedEnv {
        let mut cfg = EnvConfig::default();
        f(&mut cfg);
        EedEnv::new(cfg).unwrap()
    }

    fn run(env: &mut EedEnv, seed: u64, actions: &[Action]) -> Vec<StepResult> {
        env.reset(seed);
        actions.iter().map(|a| env.step(*a).unwrap()).collect()
    }

    #[test]
    fn action_codes_stable() {
        for (i, a) in Action::ALL.iter().enumerate() {
            assert_eq!(a.code() as usize, i);
            assert_eq!(Action::from_code(i as i64).unwrap(), *a);
        }
        assert!(Action::from_code(7).is_err());
        assert!(Action::from_code(-1).is_err());
        assert_eq!(serde_json::to_string(&Action::Clarify).unwrap(), "5");
    }

    #[test]
    fn reset_is_deterministic() {
        let mut env = env_with(|_| {});
        let actions: Vec<_> = (0..40).map(|i| Action::ALL[i % 7]).collect();
        let a = run(&mut env, 7, &actions);
        let b = run(&mut env, 7, &actions);
        assert_eq!(a, b);
        let c = run(&mut env, 8, &actions);
        assert_ne!(a, c);
    }

    #[test]
    fn no_affect_masks_slots() {
        let mut env = env_with(|c| c.ablations.no_affect = true);
        let (obs, _) = env.reset(3);
        let v = obs.to_array();
        assert_eq!((v[2], v[3]), (0.0, 0.0));
        let r = env.step(Action::RefuseExplainEmpathic).unwrap();
        assert_eq!((r.observation.valence, r.observation.arousal), (0.0, 0.0));
    }

    #[test]
    fn initial_trust_is_anchor() {
        let mut env = env_with(|_| {});
        let (obs, info) = env.reset(0);
        assert_eq!(obs.trust, 0.70);
        assert_eq!(obs.valence, 0.5);
        assert_eq!(info.persona, "Balanced");
    }

    #[test]
    fn sample_command_fractions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let c = sample_command(&mut rng, 0.0);
            assert!(!c.risky && c.p < 0.5);
            let c = sample_command(&mut rng, 1.0);
            assert!(c.risky && c.p >= 0.5);
        }
        let n = 100_000;
        let risky = (0..n).filter(|_| sample_command(&mut rng, 0.5).risky).count();
        assert!((risky as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn perceive_risk_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(perceive_risk(0.37, 0.0, &mut rng), 0.37);
        for _ in 0..100 {
            assert!(perceive_risk(1.0, 0.3, &mut rng) <= 1.0);
        }
        let n = 100_000;
        let mean = (0..n).map(|_| perceive_risk(0.5, 0.2, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn clarify_examples() {
        assert!((apply_clarify(0.4, 0.5) - 0.2).abs() < 1e-15);
        assert_eq!(apply_clarify(0.0, 0.5), 0.0);
        assert!((apply_clarify(apply_clarify(0.4, 0.5), 0.5) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn clarify_chain_in_env() {
        let mut env = env_with(|_| {});
        env.reset(5);
        let s0 = env.sigma();
        for k in 1..=6 {
            env.step(Action::Clarify).unwrap();
            assert_eq!(env.sigma(), s0 * 0.5f64.powi(k));
        }
    }

    #[test]
    fn comply_outcomes() {
        let mut safe_env = env_with(|c| c.risky_fraction = 0.0);
        safe_env.reset(0);
        for _ in 0..40 {
            let r = safe_env.step(Action::Comply).unwrap();
            assert!(!r.info.violation);
            assert_eq!(r.cost, 0.0);
        }

        let mut risky_env = env_with(|c| {
            c.risky_fraction = 1.0;
            c.stressor = Some(Stressor {
                name: "certain".into(),
                p_viol: Some(1.0),
                ..Default::default()
            });
        });
        risky_env.reset(0);
        let r = risky_env.step(Action::Comply).unwrap();
        assert!(r.info.violation);
        assert_eq!(r.cost, 1.0);
    }

    #[test]
    fn justified_matches_oracle() {
        let mut env = env_with(|c| c.risky_fraction = 1.0);
        for seed in 0..50 {
            env.reset(seed);
            let obs = env.observation();
            let p = env.command().p;
            let r = env.step(Action::RefuseExplain).unwrap();
            assert_eq!(r.info.tau, obs.tau);
            assert_eq!(r.info.oracle, oracle_label(p, obs.tau));
            assert_eq!(r.info.justified, r.info.oracle);
        }
    }

    #[test]
    fn oracle_examples() {
        assert!(oracle_label(0.9, 0.5));
        assert!(!oracle_label(0.1, 0.5));
        assert!(oracle_label(0.5, 0.5));
    }

    #[test]
    fn reward_examples() {
        let c = SocialConstants::default();
        let w = RewardWeights::default();
        let quiet = TransitionFacts {
            trust: 0.7,
            ..Default::default()
        };
        assert_eq!(compute_reward(&quiet, &w, &c, 1.0), 0.0);

        let viol = TransitionFacts {
            progress: 0.025,
            violation: true,
            blame: 0.5,
            trust: 0.7,
            ..Default::default()
        };
        assert!((compute_reward(&viol, &w, &c, 1.0) - (-1.485)).abs() < 1e-12);

        let emp = TransitionFacts {
            refuse: true,
            explain: true,
            emp: true,
            risky: true,
            trust: 0.7,
            ..Default::default()
        };
        assert!((compute_reward(&emp, &w, &c, 1.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn blame_proxy_examples() {
        assert_eq!(blame_proxy(false, 0.9), 0.0);
        assert_eq!(blame_proxy(true, 1.0), 1.0);
        assert!((blame_proxy(true, 0.6) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn curriculum_examples() {
        assert_eq!(curriculum_scale(0, 1000, true), 0.6);
        assert!((curriculum_scale(300, 1000, true) - 1.0).abs() < 1e-12);
        assert!((curriculum_scale(150, 1000, true) - 0.8).abs() < 1e-12);
        assert_eq!(curriculum_scale(900, 1000, true), 1.0);
        assert_eq!(curriculum_scale(0, 1000, false), 1.0);
    }

    #[test]
    fn masked_actions_rejected() {
        let mut env = env_with(|c| c.ablations.no_clarify_alt = true);
        env.reset(0);
        assert!(matches!(env.step(Action::Clarify), Err(Error::MaskedAction(_))));
        assert!(matches!(
            env.step(Action::ProposeAlternative),
            Err(Error::MaskedAction(_))
        ));
        assert!(env.step(Action::Comply).is_ok());
        assert!(matches!(env.step_code(9), Err(Error::InvalidAction(9))));
    }

    #[test]
    fn episode_truncates_at_horizon() {
        let mut env = env_with(|c| c.horizon = 3);
        env.reset(0);
        assert!(!env.step(Action::Comply).unwrap().truncated);
        assert!(!env.step(Action::Comply).unwrap().truncated);
        assert!(env.step(Action::Comply).unwrap().truncated);
        assert!(matches!(env.step(Action::Comply), Err(Error::EpisodeFinished)));
    }

    #[test]
    fn config_validation() {
        let bad = |f: fn(&mut EnvConfig)| {
            let mut c = EnvConfig::default();
            f(&mut c);
            EedEnv::new(c).is_err()
        };
        assert!(bad(|c| c.horizon = 0));
        assert!(bad(|c| c.kappa = 1.0));
        assert!(bad(|c| c.risky_fraction = 1.5));
        assert!(bad(|c| c.weights.w_task = 2.0));
        assert!(bad(|c| c.persona = "Nobody".into()));
        assert!(EnvConfig::from_json(r#"{"horizon": 10, "gama": 1}"#).is_err());
        assert_eq!(EnvConfig::from_json(r#"{"horizon": 10}"#).unwrap().horizon, 10);
    }

    fn action_strategy(allow_clarify_alt: bool) -> impl Strategy<Value = Action> {
        let n: usize = if allow_clarify_alt { 7 } else { 5 };
        (0..n).prop_map(|i| Action::ALL[i])
    }

    proptest! {
        #[test]
        fn safety_and_cost_semantics(
            seed in 0u64..1000,
            actions in proptest::collection::vec(action_strategy(true), 40),
        ) {
            let mut env = env_with(|_| {});
            let results = run(&mut env, seed, &actions);
            let mut progress = 0.0;
            let mut cost = 0.0;
            let mut violations = 0.0;
            for r in &results {
                if r.info.violation {
                    prop_assert!(r.info.action == Action::Comply && r.info.risky);
                    violations += 1.0;
                }
                prop_assert_eq!(r.cost == 1.0, r.info.violation);
                cost += r.cost;
                progress += match r.info.action {
                    Action::Comply if !r.info.violation => 1.0 / 40.0,
                    Action::ProposeAlternative => 0.5 / 40.0,
                    _ => 0.0,
                };
            }
            prop_assert_eq!(cost, violations);
            prop_assert!(progress <= 1.0 + 1e-12);
            prop_assert_eq!(&results, &run(&mut env, seed, &actions));
        }

        #[test]
        fn trust_penalty_ablation_ignores_hinge(
            seed in 0u64..200,
            actions in proptest::collection::vec(action_strategy(true), 20),
            anchor in 0.0f64..=1.0,
        ) {
            // Moving the hinge anchor only affects the reward through the hinge;
            // the initial trust is pinned so the dynamics stay identical.
            let mk = |t_star: f64| {
                let mut e = env_with(|c| {
                    c.ablations.no_trust_penalty = true;
                    c.constants.t_star = t_star;
                });
                e.reset(seed);
                e.social = SocialState::new(0.7, 0.5, e.social.arousal);
                e.tau = compute_threshold(&e.constants, &e.social);
                e
            };
            let (mut a, mut b) = (mk(0.7), mk(anchor));
            for act in &actions {
                let (ra, rb) = (a.step(*act).unwrap(), b.step(*act).unwrap());
                prop_assert_eq!(ra.reward, rb.reward);
            }
        }
    }
}
