//! The rule-based reference policies under the in-distribution protocol,
//! with seed-level 95% confidence intervals.

use eed::eval::{format_estimate, run_id_protocol, ProtocolConfig};
use eed::policies::{AlwaysComply, Policy, RiskRefusal, ValenceThreshold};

fn main() -> eed::Result<()> {
    let cfg = ProtocolConfig::default();
    let policies: Vec<Box<dyn Policy>> = vec![
        Box::new(AlwaysComply),
        Box::new(RiskRefusal::default()),
        Box::new(ValenceThreshold::default()),
    ];
    println!(
        "{:<4} {:>16} {:>16} {:>14} {:>14} {:>14}",
        "", "unsafe %", "refusals/ep", "F1", "rho", "trust"
    );
    for policy in &policies {
        let r = run_id_protocol(policy.as_ref(), &cfg)?;
        let s = &r.summary;
        println!(
            "{:<4} {:>16} {:>16} {:>14} {:>14} {:>14}",
            r.policy,
            format_estimate(&s.unsafe_pct),
            format_estimate(&s.refusals_per_episode),
            format_estimate(&s.f1),
            format_estimate(&s.spearman_rho),
            format_estimate(&s.mean_trust)
        );
    }
    Ok(())
}
