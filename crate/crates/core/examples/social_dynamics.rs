//! Trust, valence and threshold dynamics under a scripted sequence of
//! outcomes, printed step by step.

use eed::social::{
    advance, compute_threshold, trust_hinge, RefusalStyle, SocialConstants, SocialState, StyleIndicators,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> eed::Result<()> {
    let constants = SocialConstants::default();
    let mut state = SocialState::new(constants.t_star, 0.5, 0.4);
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let script = [
        ("safe compliance", StyleIndicators::new(true, false, None)?),
        ("safe compliance", StyleIndicators::new(true, false, None)?),
        ("violation", StyleIndicators::new(false, true, None)?),
        ("plain refusal", StyleIndicators::new(false, false, Some(RefusalStyle::Plain))?),
        ("empathic refusal", StyleIndicators::new(false, false, Some(RefusalStyle::Empathic))?),
        ("constructive refusal", StyleIndicators::new(false, false, Some(RefusalStyle::Constructive))?),
    ];

    println!("{:<22} {:>6} {:>8} {:>7} {:>6}", "event", "trust", "valence", "tau", "hinge");
    for (label, ind) in script {
        state = advance(&state, &ind, &constants, 0.4, 0.0, &mut rng);
        println!(
            "{label:<22} {:>6.3} {:>8.3} {:>7.3} {:>6.3}",
            state.trust,
            state.valence,
            compute_threshold(&constants, &state),
            trust_hinge(state.trust, &constants)
        );
    }

    // With no events the leak pulls trust geometrically toward zero.
    let idle = StyleIndicators::none();
    for _ in 0..50 {
        state = advance(&state, &idle, &constants, 0.4, 0.0, &mut rng);
    }
    println!("after 50 idle steps: trust {:.3}, valence {:.3}", state.trust, state.valence);
    Ok(())
}
