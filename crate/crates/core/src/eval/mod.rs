//! Deterministic rollouts, metrics and the evaluation protocols.

mod aggregate;
mod blame;
pub mod metrics;
mod protocol;
mod report;
mod rollout;

pub use aggregate::{aggregate_ci, Estimate, MetricsSummary};
pub use blame::{eval_blame, step_blame};
pub use metrics::{
    auroc_prauc, average_ranks, bin_index, brier, compute_metrics, refusal_stats, reliability_spearman, unsafe_rate,
    Confusion, Discrimination, MetricWarning, Metrics, RefusalStats, RELIABILITY_BINS,
};
pub use protocol::{
    persona_seed, run_id_protocol, run_st_protocol, CellResult, Protocol, ProtocolConfig, ProtocolReport,
    PROTOCOL_VERSION,
};
pub use report::{format_estimate, read_episode_logs, write_episode_logs, EvalReport, TABLE_COLUMNS};
pub use rollout::{rollout, EpisodeLog, StepRecord};
