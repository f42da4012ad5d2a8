//! In-distribution and stress-test evaluation sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate_ci, Estimate, MetricsSummary};
use super::blame::eval_blame;
use super::metrics::{compute_metrics, Metrics};
use super::rollout::{rollout, EpisodeLog};
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::personas::{self, Stressor};
use crate::policies::Policy;
use crate::seed::derive_seed;
use crate::vignette::BlameModel;

pub const PROTOCOL_VERSION: u32 = 1;

const STREAM_PERSONA: u64 = 0x5EED_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Id,
    St,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Id => "id",
            Protocol::St => "st",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "id" => Ok(Protocol::Id),
            "st" => Ok(Protocol::St),
            other => Err(Error::Config(format!("unknown protocol {other:?}; expected id or st"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub seeds: Vec<u64>,
    /// Episodes per persona (ID) or per cell (ST).
    pub episodes: usize,
    pub level: f64,
    pub deterministic: bool,
    /// Template environment; persona and stressor are set per cell.
    pub env: EnvConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blame_model: Option<BlameModel>,
    /// Keep every episode log in the returned report.
    #[serde(skip)]
    pub keep_logs: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            seeds: (0..5).collect(),
            episodes: 100,
            level: 0.95,
            deterministic: true,
            env: EnvConfig::default(),
            blame_model: None,
            keep_logs: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub persona: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stressor: Option<String>,
    pub seed: u64,
    pub metrics: Metrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_blame: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub protocol_version: u32,
    pub protocol: Protocol,
    pub policy: String,
    pub seeds: Vec<u64>,
    pub episodes: usize,
    pub summary: MetricsSummary,
    pub per_seed: Vec<Metrics>,
    pub cells: Vec<CellResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_blame: Option<Estimate>,
    #[serde(skip)]
    pub logs: Vec<EpisodeLog>,
}

/// Rollout seed for a persona under a protocol seed. Depends on the persona
/// only, so a stress cell and a plain run of the same persona share
/// command streams.
pub fn persona_seed(seed: u64, persona: &str) -> u64 {
    let idx = personas::catalog()
        .iter()
        .position(|p| p.name == persona)
        .unwrap_or(usize::MAX) as u64;
    derive_seed(seed, STREAM_PERSONA, idx)
}

struct Job {
    seed: u64,
    persona: String,
    stressor: Option<Stressor>,
}

fn run_jobs(policy: &dyn Policy, jobs: Vec<Job>, cfg: &ProtocolConfig) -> Result<Vec<(CellResult, Vec<EpisodeLog>)>> {
    let work: Vec<(Job, Box<dyn Policy>)> = jobs.into_iter().map(|j| (j, policy.fork())).collect();
    work.into_par_iter()
        .map(|(job, mut pol)| {
            let env = cfg.env.clone().with_persona(&job.persona).with_stressor(job.stressor.clone());
            let logs = rollout(
                pol.as_mut(),
                &env,
                cfg.episodes,
                persona_seed(job.seed, &job.persona),
                cfg.deterministic,
            )?;
            let mean_blame = cfg.blame_model.as_ref().map(|m| eval_blame(&logs, m));
            let cell = CellResult {
                persona: job.persona,
                stressor: job.stressor.map(|s| s.name),
                seed: job.seed,
                metrics: compute_metrics(&logs),
                mean_blame,
            };
            Ok((cell, logs))
        })
        .collect()
}

fn check(cfg: &ProtocolConfig) -> Result<()> {
    if cfg.seeds.is_empty() {
        return Err(Error::Config("evaluation needs at least one seed".into()));
    }
    cfg.env.validate()
}

fn blame_estimate(per_seed: &[Option<f64>], level: f64) -> Result<Option<Estimate>> {
    let vals: Option<Vec<f64>> = per_seed.iter().copied().collect();
    vals.map(|v| aggregate_ci(&v, level)).transpose()
}

/// Four training personas per seed; metrics pooled over personas within a
/// seed, then aggregated across seeds.
pub fn run_id_protocol(policy: &dyn Policy, cfg: &ProtocolConfig) -> Result<ProtocolReport> {
    check(cfg)?;
    let names: Vec<String> = personas::training_personas().into_iter().map(|p| p.name).collect();
    let jobs = cfg
        .seeds
        .iter()
        .flat_map(|&seed| {
            names.iter().map(move |n| Job {
                seed,
                persona: n.clone(),
                stressor: None,
            })
        })
        .collect();
    let results = run_jobs(policy, jobs, cfg)?;
    let mut per_seed = Vec::new();
    let mut blame = Vec::new();
    for &seed in &cfg.seeds {
        let logs: Vec<EpisodeLog> = results
            .iter()
            .filter(|(c, _)| c.seed == seed)
            .flat_map(|(_, l)| l.iter().cloned())
            .collect();
        per_seed.push(compute_metrics(&logs));
        blame.push(cfg.blame_model.as_ref().map(|m| eval_blame(&logs, m)));
    }
    finish(Protocol::Id, policy, cfg, per_seed, blame, results)
}

/// Three holdout personas crossed with every stressor. Each seed scores the
/// unweighted mean over its cells.
pub fn run_st_protocol(policy: &dyn Policy, cfg: &ProtocolConfig) -> Result<ProtocolReport> {
    check(cfg)?;
    let names: Vec<String> = personas::holdout_personas().into_iter().map(|p| p.name).collect();
    let stressors = personas::stressors();
    let mut jobs = Vec::new();
    for &seed in &cfg.seeds {
        for n in &names {
            for s in &stressors {
                jobs.push(Job {
                    seed,
                    persona: n.clone(),
                    stressor: Some(s.clone()),
                });
            }
        }
    }
    let results = run_jobs(policy, jobs, cfg)?;
    let mut per_seed = Vec::new();
    let mut blame = Vec::new();
    for &seed in &cfg.seeds {
        let cells: Vec<&CellResult> = results.iter().map(|(c, _)| c).filter(|c| c.seed == seed).collect();
        per_seed.push(Metrics::mean_of(&cells.iter().map(|c| c.metrics.clone()).collect::<Vec<_>>()));
        let b: Option<Vec<f64>> = cells.iter().map(|c| c.mean_blame).collect();
        blame.push(b.map(|v| v.iter().sum::<f64>() / v.len() as f64));
    }
    finish(Protocol::St, policy, cfg, per_seed, blame, results)
}

fn finish(
    protocol: Protocol,
    policy: &dyn Policy,
    cfg: &ProtocolConfig,
    per_seed: Vec<Metrics>,
    blame: Vec<Option<f64>>,
    results: Vec<(CellResult, Vec<EpisodeLog>)>,
) -> Result<ProtocolReport> {
    let summary = MetricsSummary::from_seeds(&per_seed, cfg.level)?;
    let mean_blame = blame_estimate(&blame, cfg.level)?;
    let mut cells = Vec::with_capacity(results.len());
    let mut logs = Vec::new();
    for (c, l) in results {
        cells.push(c);
        if cfg.keep_logs {
            logs.extend(l);
        }
    }
    Ok(ProtocolReport {
        protocol_version: PROTOCOL_VERSION,
        protocol,
        policy: policy.name(),
        seeds: cfg.seeds.clone(),
        episodes: cfg.episodes,
        summary,
        per_seed,
        cells,
        mean_blame,
        logs,
    })
}
