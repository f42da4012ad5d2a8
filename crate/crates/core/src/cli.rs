//! Command-line front end: `train`, `eval`, `fit-vignettes`, `report` and
//! `serve-bridge`.
//!
//! Every command that produces files writes them to a fresh run directory
//! (`runs/<unix-time>-<command>-<seed>/` unless `--run-dir` is given) next to
//! a `manifest.json` describing how they were produced. Exit codes: 0 on
//! success, 1 for usage or configuration errors, 2 for runtime failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bridge;
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::eval::{self, EvalReport, Protocol, ProtocolConfig, ProtocolReport};
use crate::policies::{AlwaysComply, Policy, RiskRefusal, ValenceThreshold, VignetteGate};
use crate::ppo::{self, Checkpoint, TrainConfig, Variant};
use crate::vignette::{self, EtaBounds, FitOptions, FittedConstants, SyntheticSpec};

#[derive(Debug, Parser)]
#[command(name = "eed", version, about = "Refusal-calibration benchmark: train, evaluate and fit vignette constants")]
pub struct Cli {
    /// Worker threads for evaluation (default: logical cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a PPO-family agent.
    Train(TrainArgs),
    /// Evaluate a heuristic or a checkpoint under the ID and/or ST protocol.
    Eval(EvalArgs),
    /// Fit vignette constants from a ratings CSV or a synthetic cohort.
    FitVignettes(FitArgs),
    /// Merge evaluation runs into one comparison table.
    Report(ReportArgs),
    /// Serve the environment over line-delimited JSON.
    ServeBridge(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Parent directory for new run directories.
    #[arg(long, default_value = "runs")]
    pub out_dir: PathBuf,
    /// Exact output directory (must not already hold results).
    #[arg(long)]
    pub run_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training config (JSON; unknown keys are rejected).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub variant: Option<Variant>,
    #[arg(long, env = "EED_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub total_steps: Option<u64>,
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long)]
    pub minibatch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub gae_lambda: Option<f64>,
    #[arg(long)]
    pub clip_epsilon: Option<f64>,
    #[arg(long)]
    pub entropy_coef: Option<f64>,
    #[arg(long)]
    pub value_coef: Option<f64>,
    /// Lagrangian violation budget per episode.
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long)]
    pub multiplier_lr: Option<f64>,
    #[arg(long)]
    pub initial_lambda: Option<f64>,
    /// Steps between evaluation snapshots (0 disables).
    #[arg(long)]
    pub eval_interval: Option<u64>,
    #[arg(long)]
    pub no_affect: bool,
    #[arg(long)]
    pub no_clarify_alt: bool,
    #[arg(long)]
    pub no_trust_penalty: bool,
    #[arg(long)]
    pub no_curriculum: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolChoice {
    Id,
    St,
    Both,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// ac, rr, vt, vg, or a checkpoint path.
    #[arg(long)]
    pub policy: String,
    #[arg(long, value_enum, default_value_t = ProtocolChoice::Id)]
    pub protocol: ProtocolChoice,
    /// Explicit comma-separated seed list.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// First seed when no list is given.
    #[arg(long, env = "EED_SEED")]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 5)]
    pub n_seeds: u64,
    #[arg(long, default_value_t = 100)]
    pub episodes: usize,
    /// Fitted vignette constants (required for vg).
    #[arg(long)]
    pub constants: Option<PathBuf>,
    /// Environment config template (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write every episode as JSON lines.
    #[arg(long)]
    pub save_logs: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Ratings CSV in long format.
    pub csv: Option<PathBuf>,
    /// Generate a synthetic cohort with this seed instead of reading a CSV.
    #[arg(long)]
    pub synthetic: Option<u64>,
    #[arg(long, default_value_t = 54)]
    pub participants: usize,
    /// L2 strength of the logistic fit.
    #[arg(long, default_value_t = 1.0)]
    pub l2: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eta_lo: f64,
    #[arg(long, default_value_t = 0.25)]
    pub eta_hi: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Evaluation run directories.
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Listen on this TCP port instead of stdio.
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Default environment config (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Written into every run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_path: Option<PathBuf>,
    pub config: Value,
    pub seeds: Vec<u64>,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub git_commit: Option<String>,
    pub output_dir: PathBuf,
    pub started_unix: u64,
    pub elapsed_secs: f64,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))
    }
}

/// Like `println!`, but a closed stdout (e.g. piped into `head`) is ignored.
macro_rules! say {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const TABLE_FILE: &str = "table.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const TRAIN_LOG_FILE: &str = "train_log.jsonl";
pub const CONSTANTS_FILE: &str = "constants.json";

struct RunContext {
    dir: PathBuf,
    command: &'static str,
    args: Vec<String>,
    started: Instant,
    started_unix: u64,
}

impl RunContext {
    fn create(output: &OutputArgs, command: &'static str, seed: u64, args: &[String]) -> Result<Self> {
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let dir = match &output.run_dir {
            Some(d) => {
                if d.join(MANIFEST_FILE).exists() || d.join(CHECKPOINT_FILE).exists() {
                    return Err(Error::Usage(format!(
                        "{} already holds a run; choose a new --run-dir (resuming is not supported)",
                        d.display()
                    )));
                }
                d.clone()
            }
            None => {
                let base = output.out_dir.join(format!("{started_unix}-{command}-{seed}"));
                let mut dir = base.clone();
                let mut k = 1;
                while dir.exists() {
                    dir = PathBuf::from(format!("{}-{k}", base.display()));
                    k += 1;
                }
                dir
            }
        };
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self {
            dir,
            command,
            args: args.to_vec(),
            started: Instant::now(),
            started_unix,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, contents).map_err(|e| Error::io(&p, e))
    }

    fn finish(&self, config_path: Option<&Path>, config: Value, seeds: Vec<u64>) -> Result<RunManifest> {
        let m = RunManifest {
            command: self.command.to_string(),
            args: self.args.clone(),
            config_path: config_path.map(Path::to_path_buf),
            config,
            seeds,
            version: env!("CARGO_PKG_VERSION").to_string(),
            git_commit: git_commit(),
            output_dir: self.dir.clone(),
            started_unix: self.started_unix,
            elapsed_secs: self.started.elapsed().as_secs_f64(),
        };
        self.write(MANIFEST_FILE, &serde_json::to_string_pretty(&m)?)?;
        Ok(m)
    }
}

fn git_commit() -> Option<String> {
    let out = std::process::Command::new("git")
        .args(["rev-parse", "--short=12", "HEAD"])
        .stderr(std::process::Stdio::null())
        .output()
        .ok()?;
    out.status
        .success()
        .then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses the command line and runs it, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let printable: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli, &printable) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli, args: &[String]) -> Result<()> {
    if let Some(n) = cli.workers {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("worker pool already initialized");
        }
    }
    match cli.command {
        Command::Train(a) => cmd_train(&a, args).map(|_| ()),
        Command::Eval(a) => cmd_eval(&a, args).map(|_| ()),
        Command::FitVignettes(a) => cmd_fit_vignettes(&a, args).map(|_| ()),
        Command::Report(a) => cmd_report(&a, args).map(|_| ()),
        Command::ServeBridge(a) => cmd_serve_bridge(&a),
    }
}

/// Resolved training config: file, then `EED_SEED`, then flags.
pub fn resolve_train_config(a: &TrainArgs) -> Result<TrainConfig> {
    let mut cfg = match &a.config {
        Some(p) => serde_json::from_str::<TrainConfig>(&read_text(p)?)?,
        None => TrainConfig::default(),
    };
    macro_rules! apply {
        ($($field:ident => $target:expr),* $(,)?) => {
            $(if let Some(v) = a.$field { $target = v; })*
        };
    }
    apply!(
        variant => cfg.variant,
        seed => cfg.seed,
        total_steps => cfg.total_steps,
        n_steps => cfg.n_steps,
        minibatch_size => cfg.minibatch_size,
        epochs => cfg.epochs,
        learning_rate => cfg.learning_rate,
        gamma => cfg.gamma,
        gae_lambda => cfg.gae_lambda,
        clip_epsilon => cfg.clip_epsilon,
        entropy_coef => cfg.entropy_coef,
        value_coef => cfg.value_coef,
        budget => cfg.lagrange.budget,
        multiplier_lr => cfg.lagrange.multiplier_lr,
        initial_lambda => cfg.lagrange.initial_lambda,
        eval_interval => cfg.eval_interval,
    );
    let ab = &mut cfg.env.ablations;
    ab.no_affect |= a.no_affect;
    ab.no_clarify_alt |= a.no_clarify_alt;
    ab.no_trust_penalty |= a.no_trust_penalty;
    ab.no_curriculum |= a.no_curriculum;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub dir: PathBuf,
    pub checkpoint: Checkpoint,
    pub manifest: RunManifest,
}

pub fn cmd_train(a: &TrainArgs, args: &[String]) -> Result<TrainRun> {
    let cfg = resolve_train_config(a)?;
    let ctx = RunContext::create(&a.output, "train", cfg.seed, args)?;
    let log_path = ctx.path(TRAIN_LOG_FILE);
    let file = fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
    let mut log_out = std::io::BufWriter::new(file);
    let outcome = ppo::train_with_observer(&cfg, |entry| {
        serde_json::to_writer(&mut log_out, entry)?;
        log_out.write_all(b"\n").map_err(|e| Error::io(&log_path, e))?;
        log::info!(
            "update {} step {} reward {:?} cost {:?} lambda {:?}",
            entry.update,
            entry.step,
            entry.mean_reward,
            entry.mean_cost,
            entry.lambda
        );
        Ok(())
    })?;
    log_out.flush().map_err(|e| Error::io(&log_path, e))?;
    drop(log_out);
    let checkpoint = ppo::save_checkpoint(&ctx.path(CHECKPOINT_FILE), &outcome.network, &cfg, outcome.steps)?;
    if !outcome.snapshots.is_empty() {
        ctx.write("snapshots.json", &serde_json::to_string_pretty(&outcome.snapshots)?)?;
    }
    let manifest = ctx.finish(a.config.as_deref(), serde_json::to_value(&cfg)?, vec![cfg.seed])?;
    say!(
        "trained {} for {} steps -> {}",
        cfg.variant,
        outcome.steps,
        ctx.path(CHECKPOINT_FILE).display()
    );
    Ok(TrainRun {
        dir: ctx.dir,
        checkpoint,
        manifest,
    })
}

/// A heuristic name or a checkpoint path, turned into a policy plus the
/// environment template it should be evaluated under.
pub fn resolve_policy(
    name: &str,
    constants: Option<&FittedConstants>,
    env: &EnvConfig,
) -> Result<(Box<dyn Policy>, EnvConfig)> {
    let heuristic: Option<Box<dyn Policy>> = match name.to_ascii_lowercase().as_str() {
        "ac" => Some(Box::new(AlwaysComply)),
        "rr" => Some(Box::new(RiskRefusal {
            tau0: constants.map_or(RiskRefusal::default().tau0, |c| c.rr_tau0),
        })),
        "vt" => Some(Box::new(ValenceThreshold::default())),
        "vg" => {
            let c = constants.ok_or_else(|| {
                Error::Usage(
                    "the vg policy needs fitted vignette constants: run `eed fit-vignettes --synthetic 42` \
                     (or pass a ratings CSV) and then `eval --policy vg --constants <run-dir>/constants.json`"
                        .into(),
                )
            })?;
            Some(Box::new(VignetteGate { model: c.gate_model()? }))
        }
        _ => None,
    };
    if let Some(p) = heuristic {
        return Ok((p, env.clone()));
    }
    let path = Path::new(name);
    if !path.exists() {
        let looks_like_path = name.contains(std::path::MAIN_SEPARATOR) || name.contains('/') || name.ends_with(".json");
        return Err(if looks_like_path {
            Error::Checkpoint(format!("checkpoint {} does not exist", path.display()))
        } else {
            Error::Usage(format!(
                "unknown policy {name:?}: expected ac, rr, vt, vg or a checkpoint path"
            ))
        });
    }
    let ckpt = ppo::load_checkpoint(path)?;
    let mut env = ckpt.config.env.clone();
    if let Some(c) = constants {
        env.constants = c.social_constants(&env.constants);
    }
    Ok((Box::new(ckpt.policy(0)?), env))
}

#[derive(Debug, Clone)]
pub struct EvalRun {
    pub dir: PathBuf,
    pub report: EvalReport,
    pub manifest: RunManifest,
}

pub fn cmd_eval(a: &EvalArgs, args: &[String]) -> Result<EvalRun> {
    let constants = a.constants.as_deref().map(FittedConstants::load).transpose()?;
    let mut env = match &a.config {
        Some(p) => EnvConfig::from_json(&read_text(p)?)?,
        None => EnvConfig::default(),
    };
    if let Some(c) = &constants {
        env.constants = c.social_constants(&env.constants);
    }
    let (policy, env) = resolve_policy(&a.policy, constants.as_ref(), &env)?;
    let seeds = match &a.seeds {
        Some(s) if !s.is_empty() => s.clone(),
        _ => {
            let base = a.seed.unwrap_or(env.seed);
            (base..base + a.n_seeds.max(1)).collect()
        }
    };
    let pcfg = ProtocolConfig {
        seeds: seeds.clone(),
        episodes: a.episodes,
        env,
        blame_model: constants.as_ref().map(|c| c.blame_model()),
        keep_logs: a.save_logs,
        ..ProtocolConfig::default()
    };
    let ctx = RunContext::create(&a.output, "eval", seeds[0], args)?;
    let protocols: &[Protocol] = match a.protocol {
        ProtocolChoice::Id => &[Protocol::Id],
        ProtocolChoice::St => &[Protocol::St],
        ProtocolChoice::Both => &[Protocol::Id, Protocol::St],
    };
    let mut reports: Vec<ProtocolReport> = Vec::new();
    let mut logs = Vec::new();
    for p in protocols {
        let mut r = match p {
            Protocol::Id => eval::run_id_protocol(policy.as_ref(), &pcfg)?,
            Protocol::St => eval::run_st_protocol(policy.as_ref(), &pcfg)?,
        };
        logs.append(&mut r.logs);
        print_summary(&r);
        reports.push(r);
    }
    let report = EvalReport::new(reports);
    ctx.write(METRICS_FILE, &report.to_json()?)?;
    ctx.write(TABLE_FILE, &report.to_csv()?)?;
    if a.save_logs {
        eval::write_episode_logs(&ctx.path("episodes.jsonl"), &logs)?;
    }
    let manifest = ctx.finish(a.config.as_deref(), serde_json::to_value(&pcfg)?, seeds)?;
    Ok(EvalRun {
        dir: ctx.dir,
        report,
        manifest,
    })
}

fn print_summary(r: &ProtocolReport) {
    say!(
        "[{}] {} over {} seed(s) x {} episodes{}",
        r.protocol,
        r.policy,
        r.seeds.len(),
        r.episodes,
        if r.protocol == Protocol::St {
            format!(" x {} cells", r.cells.len() / r.seeds.len().max(1))
        } else {
            String::new()
        }
    );
    for (name, e) in r.summary.columns() {
        say!("  {name:<22} {}", eval::format_estimate(&e));
    }
}

#[derive(Debug, Clone)]
pub struct FitRun {
    pub dir: PathBuf,
    pub constants: FittedConstants,
    pub manifest: RunManifest,
}

pub fn cmd_fit_vignettes(a: &FitArgs, args: &[String]) -> Result<FitRun> {
    let (records, seed) = match (&a.csv, a.synthetic) {
        (Some(_), Some(_)) => return Err(Error::Usage("pass either a CSV path or --synthetic, not both".into())),
        (None, None) => return Err(Error::Usage("pass a ratings CSV path or --synthetic <seed>".into())),
        (Some(p), None) => {
            let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
            (vignette::parse_long_format(&bytes)?, 0)
        }
        (None, Some(seed)) => {
            let spec = SyntheticSpec {
                n_participants: a.participants,
                ..SyntheticSpec::default()
            };
            (vignette::generate_synthetic_records(&spec, seed), seed)
        }
    };
    let opts = FitOptions {
        l2: a.l2,
        eta_bounds: EtaBounds {
            lo: a.eta_lo,
            hi: a.eta_hi,
        },
    };
    let report = vignette::fit_constants(&records, &opts, &Default::default())?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let ctx = RunContext::create(&a.output, "fit-vignettes", seed, args)?;
    if a.synthetic.is_some() {
        let p = ctx.path("synthetic_vignettes.csv");
        fs::write(&p, vignette::write_long_format(&records)).map_err(|e| Error::io(&p, e))?;
    }
    report.constants.save(&ctx.path(CONSTANTS_FILE))?;
    let diagnostics = serde_json::json!({
        "n_records": report.n_records,
        "blame_terms": report.blame.names,
        "blame_std_errors": report.blame.solution.std_errors,
        "blame_reference": report.blame.reference,
        "logit_iterations": report.logit.iterations,
        "eta_effects": report.eta.effects,
        "warnings": report.warnings,
    });
    ctx.write("diagnostics.json", &serde_json::to_string_pretty(&diagnostics)?)?;
    let manifest = ctx.finish(
        a.csv.as_deref(),
        serde_json::json!({"synthetic": a.synthetic, "participants": a.participants, "options": opts}),
        vec![seed],
    )?;
    say!(
        "t_star {:.4}, logit slope {:.3}, constants -> {}",
        report.constants.t_star,
        report.constants.logit.slope,
        ctx.path(CONSTANTS_FILE).display()
    );
    Ok(FitRun {
        dir: ctx.dir,
        constants: report.constants,
        manifest,
    })
}

#[derive(Debug, Clone)]
pub struct ReportRun {
    pub dir: PathBuf,
    pub report: EvalReport,
}

pub fn cmd_report(a: &ReportArgs, args: &[String]) -> Result<ReportRun> {
    let mut parts = Vec::new();
    for dir in &a.runs {
        let manifest = RunManifest::load(dir)?;
        if manifest.command != "eval" {
            return Err(Error::Manifest(format!(
                "{} is a {} run; only eval runs can be reported",
                dir.display(),
                manifest.command
            )));
        }
        parts.push(EvalReport::from_json(&read_text(&dir.join(METRICS_FILE))?)?);
    }
    let mut merged = EvalReport::merge(parts)?;
    merged.reports.sort_by_key(|r| r.protocol != Protocol::Id);
    let ctx = RunContext::create(&a.output, "report", 0, args)?;
    ctx.write(METRICS_FILE, &merged.to_json()?)?;
    ctx.write(TABLE_FILE, &merged.to_csv()?)?;
    for protocol in [Protocol::Id, Protocol::St] {
        let rows: Vec<_> = merged.by_protocol(protocol).collect();
        if rows.is_empty() {
            continue;
        }
        say!("== {} ==", protocol.to_string().to_uppercase());
        for r in rows {
            say!(
                "  {:<16} unsafe% {}  refusals/ep {}  F1 {}  rho {}  trust {}",
                r.policy,
                eval::format_estimate(&r.summary.unsafe_pct),
                eval::format_estimate(&r.summary.refusals_per_episode),
                eval::format_estimate(&r.summary.f1),
                eval::format_estimate(&r.summary.spearman_rho),
                eval::format_estimate(&r.summary.mean_trust),
            );
        }
    }
    let runs: Vec<String> = a.runs.iter().map(|p| p.display().to_string()).collect();
    ctx.finish(None, serde_json::json!({ "runs": runs }), Vec::new())?;
    Ok(ReportRun {
        dir: ctx.dir,
        report: merged,
    })
}

pub fn cmd_serve_bridge(a: &ServeArgs) -> Result<()> {
    let cfg = match &a.config {
        Some(p) => EnvConfig::from_json(&read_text(p)?)?,
        None => EnvConfig::default(),
    };
    match a.port {
        None => bridge::serve_stdio(&cfg),
        Some(port) => {
            let addr = format!("{}:{port}", a.host);
            let listener = std::net::TcpListener::bind(&addr).map_err(|e| Error::io(&addr, e))?;
            eprintln!("serving on {}", listener.local_addr().map_err(|e| Error::io(&addr, e))?);
            bridge::serve_tcp(listener, &cfg)
        }
    }
}
