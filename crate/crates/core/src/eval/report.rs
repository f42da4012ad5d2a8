//! Report files: JSON summaries, a CSV table and JSON-lines episode logs.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::aggregate::Estimate;
use super::protocol::{Protocol, ProtocolReport, PROTOCOL_VERSION};
use super::rollout::EpisodeLog;
use crate::error::{Error, Result};

/// Column order of the results table.
pub const TABLE_COLUMNS: [&str; 13] = [
    "mean_reward",
    "unsafe_pct",
    "refusals_per_episode",
    "justified_ratio",
    "f1",
    "spearman_rho",
    "mean_trust",
    "precision",
    "recall",
    "brier",
    "auroc",
    "pr_auc",
    "mean_valence",
];

/// One or more protocol reports bundled as a single document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol_version: u32,
    pub reports: Vec<ProtocolReport>,
}

impl EvalReport {
    pub fn new(reports: Vec<ProtocolReport>) -> Self {
        Self {
            protocol_version: PROTOCOL_VERSION,
            reports,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: EvalReport = serde_json::from_str(text)?;
        r.check_versions()?;
        Ok(r)
    }

    fn check_versions(&self) -> Result<()> {
        for v in std::iter::once(self.protocol_version).chain(self.reports.iter().map(|r| r.protocol_version)) {
            if v != PROTOCOL_VERSION {
                return Err(Error::Manifest(format!(
                    "report protocol_version {v} does not match {PROTOCOL_VERSION}"
                )));
            }
        }
        Ok(())
    }

    /// Concatenates reports; all inputs must share one protocol version.
    pub fn merge(parts: Vec<EvalReport>) -> Result<Self> {
        let mut reports = Vec::new();
        for p in parts {
            p.check_versions()?;
            reports.extend(p.reports);
        }
        Ok(Self::new(reports))
    }

    pub fn by_protocol(&self, protocol: Protocol) -> impl Iterator<Item = &ProtocolReport> {
        self.reports.iter().filter(move |r| r.protocol == protocol)
    }

    /// CSV with one row per (protocol, policy); each metric gets a mean and
    /// a CI half-width column (empty when undefined).
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["protocol".to_string(), "policy".to_string(), "n_seeds".to_string()];
        for c in TABLE_COLUMNS {
            header.push(c.to_string());
            header.push(format!("{c}_ci"));
        }
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.reports {
            let mut row = vec![r.protocol.to_string(), r.policy.clone(), r.summary.n_seeds.to_string()];
            for (_, e) in r.summary.columns() {
                row.push(fmt_num(e.mean));
                row.push(e.half_width.map(fmt_num).unwrap_or_default());
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Manifest(format!("csv buffer: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Manifest(format!("csv write failed: {e}"))
}

fn fmt_num(x: f64) -> String {
    format!("{x:.4}")
}

pub fn format_estimate(e: &Estimate) -> String {
    match e.half_width {
        Some(h) => format!("{:.3} ± {:.3}", e.mean, h),
        None => format!("{:.3}", e.mean),
    }
}

pub fn write_episode_logs(path: &Path, logs: &[EpisodeLog]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for l in logs {
        serde_json::to_writer(&mut out, l)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_episode_logs(path: &Path) -> Result<Vec<EpisodeLog>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}
