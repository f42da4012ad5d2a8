use eed::env::*;
use eed::personas::*;
use eed::policies::*;
use eed::social::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

fn obs(p_hat: f64, tau: f64, valence: f64) -> Observation {
    Observation {
        p_hat,
        tau,
        valence,
        arousal: 0.4,
        trust: 0.7,
        persona: [0.5, 0.4, 0.5, 0.8],
    }
}

fn indicator_strategy() -> impl Strategy<Value = StyleIndicators> {
    (0u8..3, prop::option::of(0u8..4)).prop_map(|(outcome, style)| {
        let style = style.map(|s| match s {
            0 => RefusalStyle::Plain,
            1 => RefusalStyle::Explain,
            2 => RefusalStyle::Empathic,
            _ => RefusalStyle::Constructive,
        });
        StyleIndicators::new(outcome == 1, outcome == 2, style).unwrap()
    })
}

#[test]
fn threshold_clips_and_decreases_with_trust() {
    let c = SocialConstants {
        tau0: 0.5,
        c_trust: 0.4,
        c_val: 0.3,
        ..Default::default()
    };
    assert!(close(compute_threshold(&c, &SocialState::new(1.0, 1.0, 0.0)), 0.5));
    assert!(close(compute_threshold(&c, &SocialState::new(0.0, 1.0, 0.0)), 0.9));
    let high = SocialConstants {
        c_trust: 0.8,
        c_val: 0.8,
        ..c
    };
    assert_eq!(compute_threshold(&high, &SocialState::new(0.0, 0.0, 0.0)), 1.0);
}

#[test]
fn two_styles_are_rejected() {
    assert!(StyleIndicators::from_flags(false, false, true, false, true, false).is_err());
    assert!(StyleIndicators::new(true, true, None).is_err());
    assert!(StyleIndicators::from_flags(false, false, false, false, false, true).is_ok());
}

#[test]
fn trust_leak_converges_geometrically() {
    let c = SocialConstants::default();
    let mut s = SocialState::new(0.8, 0.5, 0.4);
    for k in 1..=30 {
        s.trust = update_trust(&s, &StyleIndicators::none(), &c);
        let expected = 0.8 * (1.0 - c.lambda_trust).powi(k);
        assert!((s.trust - expected).abs() < 1e-12);
    }
}

#[test]
fn arousal_is_a_fixed_point_at_impatience() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(close(update_arousal(0.4, 0.4, 0.0, &mut rng), 0.4));
    assert!(close(update_arousal(0.0, 1.0, 0.0, &mut rng), 0.1));
    assert!(close(update_arousal(1.0, 0.0, 0.0, &mut rng), 0.9));
}

proptest! {
    #[test]
    fn trust_and_valence_stay_in_unit_interval(
        events in prop::collection::vec(indicator_strategy(), 1..200),
        t0 in 0.0f64..=1.0,
        v0 in 0.0f64..=1.0,
    ) {
        let c = SocialConstants { eta: EtaSet { viol: 0.9, emp: 0.9, cons: 0.9, ..EtaSet::default() }, ..Default::default() };
        let mut s = SocialState::new(t0, v0, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for e in &events {
            s = advance(&s, e, &c, 0.5, 0.3, &mut rng);
            prop_assert!((0.0..=1.0).contains(&s.trust));
            prop_assert!((0.0..=1.0).contains(&s.valence));
            prop_assert!((0.0..=1.0).contains(&s.arousal));
        }
    }

    #[test]
    fn threshold_non_increasing(
        ct in 0.0f64..1.0, cv in 0.0f64..1.0,
        t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0,
        v1 in 0.0f64..=1.0, v2 in 0.0f64..=1.0,
    ) {
        let c = SocialConstants { c_trust: ct, c_val: cv, ..Default::default() };
        let (tl, th) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let (vl, vh) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
        prop_assert!(compute_threshold(&c, &SocialState::new(th, vl, 0.0)) <= compute_threshold(&c, &SocialState::new(tl, vl, 0.0)) + 1e-15);
        prop_assert!(compute_threshold(&c, &SocialState::new(tl, vh, 0.0)) <= compute_threshold(&c, &SocialState::new(tl, vl, 0.0)) + 1e-15);
    }

    #[test]
    fn hinge_is_symmetric(d in 0.0f64..0.3) {
        let c = SocialConstants::default();
        prop_assert!((trust_hinge(c.t_star + d, &c) - trust_hinge(c.t_star - d, &c)).abs() < 1e-12);
    }

    #[test]
    fn episodes_are_deterministic_and_costs_match_violations(
        seed in 0u64..1000,
        actions in prop::collection::vec(0i64..7, 40),
    ) {
        let run = || {
            let mut env = EedEnv::new(EnvConfig::default().with_persona("Risk-Seeking")).unwrap();
            env.reset(seed);
            let mut out = Vec::new();
            for &a in &actions {
                out.push(env.step_code(a).unwrap());
            }
            out
        };
        let a = run();
        prop_assert_eq!(&a, &run());
        let cost: f64 = a.iter().map(|r| r.cost).sum();
        let viol = a.iter().filter(|r| r.info.violation).count() as f64;
        prop_assert_eq!(cost, viol);
        for r in &a {
            if r.info.violation {
                prop_assert!(r.info.risky && r.info.action == Action::Comply);
            }
        }
        prop_assert!(a.last().unwrap().truncated);
    }

    #[test]
    fn heuristics_are_monotone_in_risk(p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0, tau in 0.0f64..=1.0, v in 0.0f64..=1.0) {
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        prop_assert!(!risk_refusal(&obs(lo, tau, v), tau).action.is_refusal() || risk_refusal(&obs(hi, tau, v), tau).action.is_refusal());
        prop_assert!(!valence_threshold(&obs(lo, tau, v), 0.5).action.is_refusal() || valence_threshold(&obs(hi, tau, v), 0.5).action.is_refusal());
        // With the observed threshold equal to tau0 both rules agree on refuse/comply.
        prop_assert_eq!(risk_refusal(&obs(lo, tau, v), tau).action.is_refusal(), valence_threshold(&obs(lo, tau, v), 0.5).action.is_refusal());
        prop_assert_eq!(always_comply(&obs(hi, tau, v)).action, Action::Comply);
    }
}

#[test]
fn clarify_chain_is_geometric() {
    let mut env = EedEnv::new(EnvConfig::default()).unwrap();
    env.reset(3);
    let s0 = env.sigma();
    for k in 1..=5 {
        env.step(Action::Clarify).unwrap();
        assert_eq!(env.sigma(), s0 * 0.5f64.powi(k));
    }
}

#[test]
fn no_affect_zeroes_valence_and_arousal() {
    let mut cfg = EnvConfig::default();
    cfg.ablations.no_affect = true;
    let mut env = EedEnv::new(cfg).unwrap();
    let (o, _) = env.reset(1);
    let v = o.to_array();
    assert_eq!((v[2], v[3]), (0.0, 0.0));
    let r = env.step(Action::RefuseExplainEmpathic).unwrap();
    let v = r.observation.to_array();
    assert_eq!((v[2], v[3]), (0.0, 0.0));
}

#[test]
fn no_clarify_alt_rejects_actions_five_and_six() {
    let mut cfg = EnvConfig::default();
    cfg.ablations.no_clarify_alt = true;
    let mut env = EedEnv::new(cfg).unwrap();
    env.reset(0);
    assert!(matches!(env.step(Action::Clarify), Err(eed::Error::MaskedAction(_))));
    assert!(matches!(env.step(Action::ProposeAlternative), Err(eed::Error::MaskedAction(_))));
    assert!(env.step(Action::Comply).is_ok());
    assert!(matches!(env.step_code(7), Err(eed::Error::InvalidAction(7))));
}

#[test]
fn default_reset_starts_at_trust_anchor() {
    let mut env = EedEnv::new(EnvConfig::default()).unwrap();
    let (o, _) = env.reset(7);
    assert!(close(o.trust, 0.70));
}

#[test]
fn progress_never_exceeds_one_per_episode() {
    let mut env = EedEnv::new(EnvConfig::default().with_persona("Conservative")).unwrap();
    env.reset(11);
    let mut total_task = 0.0;
    loop {
        let r = env.step(Action::Comply).unwrap();
        // Safe or unviolated compliance earns exactly 1/horizon progress.
        if !r.info.violation {
            total_task += 1.0 / 40.0;
        }
        if r.truncated {
            break;
        }
    }
    assert!(total_task <= 1.0 + 1e-12);
}

#[test]
fn risky_share_matches_fraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 100_000;
    let risky = (0..n).filter(|_| sample_command(&mut rng, 0.5).risky).count() as f64 / n as f64;
    assert!((risky - 0.5).abs() < 0.01);
    for _ in 0..1000 {
        let c = sample_command(&mut rng, 0.0);
        assert!(!c.risky && c.p < 0.5);
        assert!(sample_command(&mut rng, 1.0).risky);
    }
    let mean = (0..n).map(|_| perceive_risk(0.5, 0.2, &mut rng)).sum::<f64>() / n as f64;
    assert!((mean - 0.5).abs() < 0.005);
}

#[test]
fn persona_mapping_and_stressors() {
    let p = traits_to_profile(&find_persona("Balanced").unwrap()).unwrap();
    assert!(close(p.p_viol, 0.5) && close(p.sigma0, 0.24) && close(p.c_trust, 0.30) && close(p.c_val, 0.12));
    let mixed = apply_stressor(&p, &find_stressor("adversarial_mix").unwrap());
    assert_eq!((mixed.sigma0, mixed.p_viol, mixed.c_trust, mixed.c_val), (0.40, 0.80, -0.60, -0.60));
    assert_eq!(apply_stressor(&p, &find_stressor("base").unwrap()), p);
    let names: Vec<_> = training_personas().into_iter().map(|t| t.name).collect();
    assert_eq!(names, ["Conservative", "Balanced", "Risk-Seeking", "Impatient-Receptive"]);
    assert_eq!(holdout_personas().len(), 3);
    assert!(matches!(find_persona("Nobody"), Err(eed::Error::UnknownPersona(_))));
    let bad = PersonaTraits {
        risk_tol: 1.5,
        ..find_persona("Balanced").unwrap()
    };
    assert!(traits_to_profile(&bad).is_err());
}

#[test]
fn catalog_file_round_trips() {
    let file = CatalogFile {
        personas: catalog(),
        stressors: stressors(),
    };
    let text = serde_json::to_string(&file).unwrap();
    assert_eq!(CatalogFile::from_json(&text).unwrap(), file);
}

#[test]
fn vignette_gate_boundaries() {
    let even = VignetteGateModel::new(
        0.5,
        0.2,
        0.0,
        2.0,
        StyleOffsets {
            empathic: 0.1,
            constructive: 0.1,
        },
    )
    .unwrap();
    let d = vignette_gate(&obs(0.5, 0.5, 0.5), &even);
    assert_eq!(d.action, Action::RefuseExplainConstructive);
    assert_eq!(d.refusal_probability, Some(0.5));
    assert!(vignette_gate(&obs(1.0, 0.5, 0.5), &even).refusal_probability.unwrap() > 0.99);
    assert!(VignetteGateModel::new(0.5, 0.0, 0.0, 1.0, StyleOffsets::default()).is_err());
}
