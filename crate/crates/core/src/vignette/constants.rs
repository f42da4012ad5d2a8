//! The exported constants file and the full fitting pipeline.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eta::{compute_trust_anchor, derive_eta, EtaBounds, DerivedEta};
use super::logit::{fit_style_logits, LogitFit, ENDORSE_AT};
use super::ols::{fit_blame_ols, normalized_risk, BlameFit, BlameModel, TypeOffsets};
use super::synth::SYNTHETIC_PREFIX;
use super::{ResponseType, VignetteError, VignetteRecord};
use crate::error::{Error, Result};
use crate::policies::{tune_risk_threshold, StyleOffsets, VignetteGateModel};
use crate::social::{EtaSet, SocialConstants};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlameCoefficients {
    pub intercept: f64,
    pub type_offsets: TypeOffsets,
    pub risk_slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogitCoefficients {
    pub intercept: f64,
    pub slope: f64,
    pub style_offsets: StyleOffsets,
}

/// Contents of the constants JSON file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FittedConstants {
    pub blame: BlameCoefficients,
    pub t_star: f64,
    pub risk_mean: f64,
    pub risk_std: f64,
    pub logit: LogitCoefficients,
    pub eta: EtaSet,
    #[serde(rename = "lambda_T")]
    pub lambda_trust: f64,
    #[serde(rename = "lambda_V")]
    pub lambda_valence: f64,
    /// Fitted on generated rather than real ratings.
    #[serde(default)]
    pub synthetic: bool,
    /// Fixed risk threshold tuned for the risk-refusal heuristic.
    #[serde(default = "default_rr_tau0")]
    pub rr_tau0: f64,
}

fn default_rr_tau0() -> f64 {
    0.5
}

impl FittedConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.risk_std > 0.0) {
            return Err(VignetteError::Constants(format!("risk_std = {} must be positive", self.risk_std)).into());
        }
        if !(0.0..=1.0).contains(&self.t_star) {
            return Err(VignetteError::Constants(format!("t_star = {} must lie in [0, 1]", self.t_star)).into());
        }
        Ok(())
    }

    pub fn blame_model(&self) -> BlameModel {
        BlameModel {
            intercept: self.blame.intercept,
            type_offsets: self.blame.type_offsets,
            risk_slope: self.blame.risk_slope,
        }
    }

    pub fn gate_model(&self) -> Result<VignetteGateModel> {
        VignetteGateModel::new(
            self.risk_mean,
            self.risk_std,
            self.logit.intercept,
            self.logit.slope,
            self.logit.style_offsets,
        )
    }

    /// `base` with the anchor, per-step deltas and leak rates replaced.
    pub fn social_constants(&self, base: &SocialConstants) -> SocialConstants {
        SocialConstants {
            t_star: self.t_star,
            eta: self.eta,
            lambda_trust: self.lambda_trust,
            lambda_valence: self.lambda_valence,
            ..*base
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: FittedConstants =
            serde_json::from_str(text).map_err(|e| VignetteError::Constants(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    /// L2 strength on the logistic slope and style offsets.
    pub l2: f64,
    pub eta_bounds: EtaBounds,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            l2: 1.0,
            eta_bounds: EtaBounds::default(),
        }
    }
}

/// Everything the pipeline estimated, including diagnostics that are not
/// exported.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub constants: FittedConstants,
    pub blame: BlameFit,
    pub logit: LogitFit,
    pub eta: DerivedEta,
    pub n_records: usize,
    pub warnings: Vec<String>,
}

/// Population mean and standard deviation of normalized perceived risk.
fn risk_moments(records: &[VignetteRecord]) -> (f64, f64) {
    let n = records.len() as f64;
    let mean = records.iter().map(normalized_risk).sum::<f64>() / n;
    let var = records.iter().map(|r| (normalized_risk(r) - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Labels for risk-threshold tuning: a refusal rated appropriate, or a
/// compliance rated inappropriate, means refusing was warranted.
fn refusal_warranted(r: &VignetteRecord) -> bool {
    match r.response_type {
        ResponseType::Comply => r.appropriateness < ENDORSE_AT - 1,
        _ => r.appropriateness >= ENDORSE_AT,
    }
}

pub fn fit_constants(records: &[VignetteRecord], opts: &FitOptions, defaults: &SocialConstants) -> Result<FitReport> {
    if records.is_empty() {
        return Err(VignetteError::InsufficientData("no vignette records".into()).into());
    }
    let blame = fit_blame_ols(records)?;
    let t_star = compute_trust_anchor(records)?;
    let (risk_mean, risk_std) = risk_moments(records);
    let logit = fit_style_logits(records, risk_mean, risk_std, opts.l2)?;
    let eta = derive_eta(records, &opts.eta_bounds, defaults)?;
    let scores: Vec<f64> = records.iter().map(normalized_risk).collect();
    let labels: Vec<bool> = records.iter().map(refusal_warranted).collect();
    let constants = FittedConstants {
        blame: BlameCoefficients {
            intercept: blame.model.intercept,
            type_offsets: blame.model.type_offsets,
            risk_slope: blame.model.risk_slope,
        },
        t_star,
        risk_mean,
        risk_std,
        logit: LogitCoefficients {
            intercept: logit.intercept,
            slope: logit.slope,
            style_offsets: logit.style_offsets,
        },
        eta: eta.eta,
        lambda_trust: eta.lambda_trust,
        lambda_valence: eta.lambda_valence,
        synthetic: records.iter().all(|r| r.participant.starts_with(SYNTHETIC_PREFIX)),
        rr_tau0: tune_risk_threshold(&scores, &labels),
    };
    constants.validate()?;
    let warnings = logit.warnings.clone();
    Ok(FitReport {
        constants,
        blame,
        logit,
        eta,
        n_records: records.len(),
        warnings,
    })
}
