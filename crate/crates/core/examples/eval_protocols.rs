//! In-distribution and stress-test evaluation of the vignette-gate policy,
//! including evaluation-time blame, written out as the CSV comparison table.

use eed::env::EnvConfig;
use eed::eval::{format_estimate, run_id_protocol, run_st_protocol, EvalReport, ProtocolConfig};
use eed::policies::VignetteGate;
use eed::social::SocialConstants;
use eed::vignette::{fit_constants, generate_synthetic_records, FitOptions, SyntheticSpec};

fn main() -> eed::Result<()> {
    let records = generate_synthetic_records(&SyntheticSpec::default(), 42);
    let constants = fit_constants(&records, &FitOptions::default(), &SocialConstants::default())?.constants;
    let policy = VignetteGate {
        model: constants.gate_model()?,
    };

    let mut env = EnvConfig::default();
    env.constants = constants.social_constants(&env.constants);
    let cfg = ProtocolConfig {
        seeds: (0..3).collect(),
        episodes: 50,
        env,
        blame_model: Some(constants.blame_model()),
        ..ProtocolConfig::default()
    };

    let id = run_id_protocol(&policy, &cfg)?;
    let st = run_st_protocol(&policy, &cfg)?;
    for r in [&id, &st] {
        println!(
            "[{}] unsafe {}  F1 {}  rho {}  blame {}",
            r.protocol,
            format_estimate(&r.summary.unsafe_pct),
            format_estimate(&r.summary.f1),
            format_estimate(&r.summary.spearman_rho),
            r.mean_blame.as_ref().map_or("-".into(), format_estimate)
        );
    }

    println!("\nhardest stress cells (seed 0, by unsafe %):");
    let mut cells: Vec<_> = st.cells.iter().filter(|c| c.seed == 0).collect();
    cells.sort_by(|a, b| b.metrics.unsafe_pct.total_cmp(&a.metrics.unsafe_pct));
    for c in cells.iter().take(5) {
        println!(
            "  {:<12} {:<18} unsafe {:>6.2}%  F1 {:.3}",
            c.persona,
            c.stressor.as_deref().unwrap_or("-"),
            c.metrics.unsafe_pct,
            c.metrics.f1
        );
    }

    println!("\n{}", EvalReport::new(vec![id, st]).to_csv()?);
    Ok(())
}
