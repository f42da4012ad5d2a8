//! L2-regularized logistic model of refusal endorsement against z-scored risk.
//!
//! Parameters are `[intercept, slope, empathic offset, constructive offset]`.
//! Both style offsets are penalized and the intercept is not, so the offsets
//! describe deviations of each style from the shared intercept.

use nalgebra::{DMatrix, DVector};

use super::ols::normalized_risk;
use super::{ResponseType, VignetteError, VignetteRecord};
use crate::policies::{sigmoid, StyleOffsets};

/// Appropriateness rating at which a refusal counts as endorsed.
pub const ENDORSE_AT: u8 = 5;
pub const PARAM_CAP: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LogitFit {
    pub intercept: f64,
    pub slope: f64,
    pub style_offsets: StyleOffsets,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl LogitFit {
    pub fn params(&self) -> [f64; 4] {
        [
            self.intercept,
            self.slope,
            self.style_offsets.empathic,
            self.style_offsets.constructive,
        ]
    }
}

struct Design {
    rows: Vec<[f64; 4]>,
    labels: Vec<f64>,
}

fn design(records: &[VignetteRecord], risk_mean: f64, risk_std: f64) -> Design {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for r in records.iter().filter(|r| r.response_type.is_refusal()) {
        let z = (normalized_risk(r) - risk_mean) / risk_std;
        let emp = (r.response_type == ResponseType::EmpathicRefusal) as u8 as f64;
        rows.push([1.0, z, emp, 1.0 - emp]);
        labels.push((r.appropriateness >= ENDORSE_AT) as u8 as f64);
    }
    Design { rows, labels }
}

/// Negative log-likelihood plus `l2 / 2 * (slope² + offsets²)`.
pub fn penalized_nll(records: &[VignetteRecord], risk_mean: f64, risk_std: f64, l2: f64, theta: &[f64; 4]) -> f64 {
    let d = design(records, risk_mean, risk_std);
    nll(&d, l2, theta)
}

fn nll(d: &Design, l2: f64, theta: &[f64; 4]) -> f64 {
    let mut total = 0.0;
    for (x, y) in d.rows.iter().zip(&d.labels) {
        let eta: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
        // log(1 + e^eta) - y*eta, computed stably.
        let softplus = if eta > 0.0 { eta + (-eta).exp().ln_1p() } else { eta.exp().ln_1p() };
        total += softplus - y * eta;
    }
    total + 0.5 * l2 * (theta[1].powi(2) + theta[2].powi(2) + theta[3].powi(2))
}

/// Newton's method on the penalized likelihood of refusal records.
///
/// `risk_mean` and `risk_std` z-score the normalized perceived risk. Any
/// parameter whose magnitude exceeds 10 (separated data with little
/// regularization) is capped and a warning recorded.
pub fn fit_style_logits(records: &[VignetteRecord], risk_mean: f64, risk_std: f64, l2: f64) -> Result<LogitFit, VignetteError> {
    if !(risk_std > 0.0) {
        return Err(VignetteError::InsufficientData("perceived risk is constant".into()));
    }
    if !(l2 >= 0.0) {
        return Err(VignetteError::InsufficientData(format!("L2 strength {l2} must be non-negative")));
    }
    for t in [ResponseType::EmpathicRefusal, ResponseType::ConstructiveRefusal] {
        if !records.iter().any(|r| r.response_type == t) {
            return Err(VignetteError::InsufficientData(format!("no {t} responses")));
        }
    }
    let d = design(records, risk_mean, risk_std);
    let mut theta = [0.0f64; 4];
    let mut warnings = Vec::new();
    let mut iterations = 0;
    let penalty = [1e-9, l2, l2, l2];
    for it in 0..200 {
        iterations = it + 1;
        let mut g = DVector::<f64>::zeros(4);
        let mut h = DMatrix::<f64>::zeros(4, 4);
        for (x, y) in d.rows.iter().zip(&d.labels) {
            let eta: f64 = x.iter().zip(&theta).map(|(a, b)| a * b).sum();
            let p = sigmoid(eta);
            let w = p * (1.0 - p);
            for i in 0..4 {
                g[i] += (p - y) * x[i];
                for j in 0..4 {
                    h[(i, j)] += w * x[i] * x[j];
                }
            }
        }
        for i in 0..4 {
            g[i] += penalty[i] * theta[i];
            h[(i, i)] += penalty[i];
        }
        let Some(step) = h.clone().cholesky().map(|c| c.solve(&g)).or_else(|| h.lu().solve(&g)) else {
            warnings.push("singular Hessian; stopped early".to_string());
            break;
        };
        // Backtracking keeps each Newton step a descent step.
        let current = nll(&d, l2, &theta);
        let mut t = 1.0;
        let mut next = theta;
        loop {
            for i in 0..4 {
                next[i] = theta[i] - t * step[i];
            }
            if nll(&d, l2, &next) <= current + 1e-12 || t < 1e-8 {
                break;
            }
            t *= 0.5;
        }
        let moved = (0..4).map(|i| (next[i] - theta[i]).abs()).fold(0.0, f64::max);
        theta = next;
        if theta.iter().any(|v| v.abs() > 1e3) || moved < 1e-12 {
            break;
        }
    }
    for (name, v) in ["intercept", "slope", "empathic offset", "constructive offset"].iter().zip(theta.iter_mut()) {
        if !v.is_finite() || v.abs() > PARAM_CAP {
            warnings.push(format!(
                "{name} = {v} exceeds |{PARAM_CAP}| (likely separation); capped"
            ));
            *v = if v.is_nan() { 0.0 } else { v.clamp(-PARAM_CAP, PARAM_CAP) };
        }
    }
    Ok(LogitFit {
        intercept: theta[0],
        slope: theta[1],
        style_offsets: StyleOffsets {
            empathic: theta[2],
            constructive: theta[3],
        },
        iterations,
        warnings,
    })
}
