//! One episode of the refusal environment driven by a hand-written rule:
//! clarify once when perceived risk is near the threshold, otherwise refuse
//! constructively above it and comply below it.

use eed::env::{Action, EedEnv, EnvConfig};

fn main() -> eed::Result<()> {
    let mut env = EedEnv::new(EnvConfig::default().with_persona("Conservative"))?;
    let (mut obs, info) = env.reset(7);
    println!("persona {} (sigma {:.2}, p_viol {:.2})", info.persona, info.sigma, info.p_viol);

    let (mut total, mut cost, mut clarified) = (0.0, 0.0, false);
    loop {
        let action = if !clarified && (obs.p_hat - obs.tau).abs() < 0.1 {
            clarified = true;
            Action::Clarify
        } else if obs.p_hat >= obs.tau {
            Action::RefuseExplainConstructive
        } else {
            Action::Comply
        };
        if action != Action::Clarify {
            clarified = false;
        }
        let res = env.step(action)?;
        total += res.reward;
        cost += res.cost;
        let i = &res.info;
        println!(
            "{:<26} p {:.2} p_hat {:.2} tau {:.2} oracle {:<5} viol {:<5} r {:+.3} trust {:.3}",
            format!("{:?}", i.action),
            i.p,
            i.p_hat,
            i.tau,
            i.oracle,
            i.violation,
            res.reward,
            i.trust
        );
        obs = res.observation;
        if res.terminated || res.truncated {
            break;
        }
    }
    println!("return {total:.3}, violations {cost}");
    Ok(())
}
