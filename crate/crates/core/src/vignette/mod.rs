//! Vignette rating pipeline: parse long-format ratings, fit the blame and
//! refusal-endorsement models, derive the trust anchor and per-step deltas,
//! and export the constants used by the environment and the vignette gate.

mod constants;
mod eta;
mod logit;
mod ols;
mod synth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use constants::{fit_constants, BlameCoefficients, FitOptions, FitReport, FittedConstants, LogitCoefficients};
pub use eta::{compute_trust_anchor, derive_eta, EtaBounds, EtaEffects, DerivedEta};
pub use logit::{fit_style_logits, penalized_nll, LogitFit};
pub use ols::{fit_blame_ols, normalized_risk, ols_solve, BlameFit, BlameModel, OlsSolution, TypeOffsets};
pub use synth::{generate_synthetic, generate_synthetic_records, SyntheticSpec, SYNTHETIC_PREFIX};

#[derive(Debug, thiserror::Error)]
pub enum VignetteError {
    #[error("line {line}: malformed CSV: {message}")]
    Csv { line: u64, message: String },
    #[error("missing required column {0:?}")]
    MissingColumn(String),
    #[error("line {line}, column {column}: value {value} is outside 1..=7")]
    OutOfRange { line: u64, column: String, value: i64 },
    #[error("line {line}, column {column}: cannot parse {value:?}")]
    InvalidValue { line: u64, column: String, value: String },
    #[error("line {line}: participant {participant} already rated scenario {scenario}")]
    Duplicate { line: u64, participant: String, scenario: u32 },
    #[error("not enough data: {0}")]
    InsufficientData(String),
    #[error("rank-deficient design: {0}")]
    RankDeficient(String),
    #[error("constants file: {0}")]
    Constants(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseType {
    Comply,
    EmpathicRefusal,
    ConstructiveRefusal,
}

impl ResponseType {
    pub const ALL: [ResponseType; 3] = [
        ResponseType::Comply,
        ResponseType::EmpathicRefusal,
        ResponseType::ConstructiveRefusal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ResponseType::Comply => "comply",
            ResponseType::EmpathicRefusal => "empathic_refusal",
            ResponseType::ConstructiveRefusal => "constructive_refusal",
        }
    }

    pub fn is_refusal(self) -> bool {
        self != ResponseType::Comply
    }
}

impl fmt::Display for ResponseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResponseType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "comply" => Ok(ResponseType::Comply),
            "empathic_refusal" => Ok(ResponseType::EmpathicRefusal),
            "constructive_refusal" => Ok(ResponseType::ConstructiveRefusal),
            other => Err(other.to_string()),
        }
    }
}

/// One participant's ratings of one scenario, all on 1..=7 scales.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VignetteRecord {
    pub participant: String,
    pub scenario: u32,
    pub response_type: ResponseType,
    pub appropriateness: u8,
    pub safety: u8,
    pub trust: u8,
    pub empathy: u8,
    pub blame: u8,
    pub perceived_risk: u8,
    pub comprehension: u8,
}

pub const CSV_COLUMNS: [&str; 10] = [
    "participant",
    "scenario",
    "response_type",
    "appropriateness",
    "safety",
    "trust",
    "empathy",
    "blame",
    "perceived_risk",
    "comprehension",
];

pub const MAX_SCENARIO: u32 = 10;

/// Maps a 1..=7 rating onto `[0, 1]`.
pub fn rescale_rating(r: f64) -> f64 {
    (r - 1.0) / 6.0
}

/// Parses long-format ratings. Column order is free and extra columns are
/// ignored; errors name the offending line and column.
pub fn parse_long_format(bytes: &[u8]) -> Result<Vec<VignetteRecord>, VignetteError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(bytes);
    let headers = rdr
        .headers()
        .map_err(|e| VignetteError::Csv {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut idx = [0usize; CSV_COLUMNS.len()];
    for (slot, name) in idx.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| VignetteError::MissingColumn(name.to_string()))?;
    }

    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for row in rdr.records() {
        let row = row.map_err(|e| VignetteError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |k: usize| row.get(idx[k]).unwrap_or("");
        let integer = |k: usize| -> Result<i64, VignetteError> {
            field(k).parse::<i64>().map_err(|_| VignetteError::InvalidValue {
                line,
                column: CSV_COLUMNS[k].to_string(),
                value: field(k).to_string(),
            })
        };
        let rating = |k: usize| -> Result<u8, VignetteError> {
            let v = integer(k)?;
            if !(1..=7).contains(&v) {
                return Err(VignetteError::OutOfRange {
                    line,
                    column: CSV_COLUMNS[k].to_string(),
                    value: v,
                });
            }
            Ok(v as u8)
        };

        let participant = field(0).to_string();
        if participant.is_empty() {
            return Err(VignetteError::InvalidValue {
                line,
                column: "participant".into(),
                value: String::new(),
            });
        }
        let scenario = integer(1)?;
        if !(1..=MAX_SCENARIO as i64).contains(&scenario) {
            return Err(VignetteError::InvalidValue {
                line,
                column: "scenario".into(),
                value: field(1).to_string(),
            });
        }
        let scenario = scenario as u32;
        let response_type = field(2).parse::<ResponseType>().map_err(|v| VignetteError::InvalidValue {
            line,
            column: "response_type".into(),
            value: v,
        })?;
        if !seen.insert((participant.clone(), scenario)) {
            return Err(VignetteError::Duplicate {
                line,
                participant,
                scenario,
            });
        }
        out.push(VignetteRecord {
            participant,
            scenario,
            response_type,
            appropriateness: rating(3)?,
            safety: rating(4)?,
            trust: rating(5)?,
            empathy: rating(6)?,
            blame: rating(7)?,
            perceived_risk: rating(8)?,
            comprehension: rating(9)?,
        });
    }
    Ok(out)
}

/// Serializes records with the canonical header.
pub fn write_long_format(records: &[VignetteRecord]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in records {
        w.write_record([
            r.participant.clone(),
            r.scenario.to_string(),
            r.response_type.to_string(),
            r.appropriateness.to_string(),
            r.safety.to_string(),
            r.trust.to_string(),
            r.empathy.to_string(),
            r.blame.to_string(),
            r.perceived_risk.to_string(),
            r.comprehension.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}
