//! Trains one PPO variant and evaluates it on the training personas.
//!
//! ```text
//! cargo run --release --example train_ppo -- [vanilla|masked|lagrangian] [total_steps]
//! ```

use eed::eval::{format_estimate, run_id_protocol, ProtocolConfig};
use eed::ppo::{save_checkpoint, train_with_observer, TrainConfig, Variant};

fn main() -> eed::Result<()> {
    let mut args = std::env::args().skip(1);
    let variant: Variant = args.next().as_deref().unwrap_or("masked").parse()?;
    let total_steps: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_480);

    let cfg = TrainConfig {
        variant,
        total_steps,
        seed: 1,
        ..TrainConfig::default()
    };
    let outcome = train_with_observer(&cfg, |e| {
        if e.update % 10 == 0 {
            println!(
                "update {:>4} step {:>7} reward {:>7} cost {:>6} lambda {:>6} entropy {:.3}",
                e.update,
                e.step,
                e.mean_reward.map_or("-".into(), |v| format!("{v:.2}")),
                e.mean_cost.map_or("-".into(), |v| format!("{v:.2}")),
                e.lambda.map_or("-".into(), |v| format!("{v:.3}")),
                e.entropy
            );
        }
        Ok(())
    })?;

    let path = std::env::temp_dir().join(format!("eed-{variant}-checkpoint.json"));
    save_checkpoint(&path, &outcome.network, &cfg, outcome.steps)?;
    println!("checkpoint written to {}", path.display());

    let policy = outcome.policy(variant, false, cfg.seed);
    let report = run_id_protocol(
        &policy,
        &ProtocolConfig {
            seeds: (0..3).collect(),
            episodes: 50,
            ..ProtocolConfig::default()
        },
    )?;
    let s = &report.summary;
    println!(
        "{}: unsafe {}  refusals/ep {}  F1 {}",
        report.policy,
        format_estimate(&s.unsafe_pct),
        format_estimate(&s.refusals_per_episode),
        format_estimate(&s.f1)
    );
    Ok(())
}
