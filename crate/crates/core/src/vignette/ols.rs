//! Ordinary least squares for blame on response type and normalized risk.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{rescale_rating, ResponseType, VignetteError, VignetteRecord};

/// Coefficients, standard errors and residual variance of a least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsSolution {
    pub coefficients: Vec<f64>,
    /// `None` when there are no residual degrees of freedom.
    pub std_errors: Option<Vec<f64>>,
    pub residual_variance: Option<f64>,
}

/// Solves `min |X b - y|` through a QR factorization. Columns whose pivot
/// falls below `1e-10` times the largest are reported as rank deficient.
pub fn ols_solve(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<OlsSolution, VignetteError> {
    let (n, k) = x.shape();
    if n < k {
        return Err(VignetteError::InsufficientData(format!(
            "{n} observations for {k} coefficients"
        )));
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    for i in 0..k {
        if r[(i, i)].abs() <= 1e-10 * scale.max(1e-300) {
            return Err(VignetteError::RankDeficient(format!(
                "column {:?} is collinear with earlier columns",
                names.get(i).map(String::as_str).unwrap_or("?")
            )));
        }
    }
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| VignetteError::RankDeficient("triangular solve failed".into()))?;
    let resid = y - x * &beta;
    let rss = resid.dot(&resid);
    let (std_errors, residual_variance) = if n > k {
        let s2 = rss / (n - k) as f64;
        let rinv = r
            .clone()
            .try_inverse()
            .ok_or_else(|| VignetteError::RankDeficient("R is not invertible".into()))?;
        let cov = &rinv * rinv.transpose() * s2;
        (Some((0..k).map(|i| cov[(i, i)].max(0.0).sqrt()).collect()), Some(s2))
    } else {
        (None, None)
    };
    Ok(OlsSolution {
        coefficients: beta.iter().copied().collect(),
        std_errors,
        residual_variance,
    })
}

/// Additive blame offsets relative to the reference response type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeOffsets {
    pub comply: f64,
    pub empathic_refusal: f64,
    pub constructive_refusal: f64,
}

impl TypeOffsets {
    pub fn get(&self, t: ResponseType) -> f64 {
        match t {
            ResponseType::Comply => self.comply,
            ResponseType::EmpathicRefusal => self.empathic_refusal,
            ResponseType::ConstructiveRefusal => self.constructive_refusal,
        }
    }

    fn set(&mut self, t: ResponseType, v: f64) {
        match t {
            ResponseType::Comply => self.comply = v,
            ResponseType::EmpathicRefusal => self.empathic_refusal = v,
            ResponseType::ConstructiveRefusal => self.constructive_refusal = v,
        }
    }
}

/// Blame on the raw 1..=7 scale: `intercept + offset(type) + risk_slope * risk`
/// with risk in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlameModel {
    pub intercept: f64,
    pub type_offsets: TypeOffsets,
    pub risk_slope: f64,
}

impl BlameModel {
    pub fn predict_raw(&self, response: ResponseType, risk: f64) -> f64 {
        self.intercept + self.type_offsets.get(response) + self.risk_slope * risk
    }

    /// Prediction mapped to `[0, 1]` by `(blame - 1) / 6`, clipped.
    pub fn predict(&self, response: ResponseType, risk: f64) -> f64 {
        rescale_rating(self.predict_raw(response, risk)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlameFit {
    pub model: BlameModel,
    /// Response type absorbed into the intercept.
    pub reference: ResponseType,
    pub names: Vec<String>,
    pub solution: OlsSolution,
    pub n: usize,
}

impl BlameFit {
    pub fn std_error(&self, name: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == name)?;
        self.solution.std_errors.as_ref().map(|s| s[i])
    }
}

pub fn normalized_risk(r: &VignetteRecord) -> f64 {
    rescale_rating(r.perceived_risk as f64)
}

/// Blame regressed on dummy-coded response type and normalized perceived
/// risk. Comply is the reference level when present; otherwise the first
/// present type is. Types absent from the data get no column and offset 0.
pub fn fit_blame_ols(records: &[VignetteRecord]) -> Result<BlameFit, VignetteError> {
    if records.is_empty() {
        return Err(VignetteError::InsufficientData("no records to fit blame".into()));
    }
    let present: Vec<ResponseType> = ResponseType::ALL
        .into_iter()
        .filter(|t| records.iter().any(|r| r.response_type == *t))
        .collect();
    let reference = present[0];
    let dummies = &present[1..];
    let k = 2 + dummies.len();
    let mut names = vec!["intercept".to_string()];
    names.extend(dummies.iter().map(|t| t.to_string()));
    names.push("risk".to_string());

    let x = DMatrix::from_fn(records.len(), k, |i, j| {
        let r = &records[i];
        if j == 0 {
            1.0
        } else if j == k - 1 {
            normalized_risk(r)
        } else if r.response_type == dummies[j - 1] {
            1.0
        } else {
            0.0
        }
    });
    let y = DVector::from_iterator(records.len(), records.iter().map(|r| r.blame as f64));
    let solution = ols_solve(&x, &y, &names)?;
    let b = &solution.coefficients;
    let mut offsets = TypeOffsets::default();
    for (j, t) in dummies.iter().enumerate() {
        offsets.set(*t, b[1 + j]);
    }
    Ok(BlameFit {
        model: BlameModel {
            intercept: b[0],
            type_offsets: offsets,
            risk_slope: b[k - 1],
        },
        reference,
        names,
        solution,
        n: records.len(),
    })
}
