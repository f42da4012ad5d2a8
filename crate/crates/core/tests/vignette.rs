use eed::social::SocialConstants;
use eed::vignette::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn record(participant: usize, scenario: u32, t: ResponseType, risk: u8, blame: u8, trust: u8) -> VignetteRecord {
    VignetteRecord {
        participant: format!("P{participant}"),
        scenario,
        response_type: t,
        appropriateness: 4,
        safety: 4,
        trust,
        empathy: 4,
        blame,
        perceived_risk: risk,
        comprehension: 6,
    }
}

const HEADER: &str = "participant,scenario,response_type,appropriateness,safety,trust,empathy,blame,perceived_risk,comprehension\n";

#[test]
fn parse_examples_and_errors() {
    assert!(parse_long_format(HEADER.as_bytes()).unwrap().is_empty());
    let ok = format!("{HEADER}P1,1,comply,3,2,3,2,6,5,7\nP1,2,empathic_refusal,6,6,6,7,2,6,7\n");
    let recs = parse_long_format(ok.as_bytes()).unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[1].response_type, ResponseType::EmpathicRefusal);

    let bad = format!("{HEADER}P1,1,comply,3,2,3,2,6,5,7\nP2,1,comply,3,2,8,2,6,5,7\n");
    match parse_long_format(bad.as_bytes()) {
        Err(VignetteError::OutOfRange { line, column, value }) => {
            assert_eq!((line, column.as_str(), value), (3, "trust", 8));
        }
        other => panic!("expected a range error, got {other:?}"),
    }
    let err = parse_long_format(bad.as_bytes()).unwrap_err().to_string();
    assert!(err.contains("line 3") && err.contains("trust"));

    let missing = "participant,scenario,response_type\nP1,1,comply\n";
    assert!(matches!(parse_long_format(missing.as_bytes()), Err(VignetteError::MissingColumn(_))));
    let dup = format!("{HEADER}P1,1,comply,3,2,3,2,6,5,7\nP1,1,comply,3,2,3,2,6,5,7\n");
    assert!(matches!(parse_long_format(dup.as_bytes()), Err(VignetteError::Duplicate { line: 3, .. })));
    let word = format!("{HEADER}P1,1,shrug,3,2,3,2,6,5,7\n");
    assert!(matches!(parse_long_format(word.as_bytes()), Err(VignetteError::InvalidValue { line: 2, .. })));
}

#[test]
fn synthetic_generator_is_deterministic_and_sized() {
    let a = generate_synthetic(11, 54);
    assert_eq!(a, generate_synthetic(11, 54));
    assert_ne!(a, generate_synthetic(12, 54));
    let recs = parse_long_format(&a).unwrap();
    assert_eq!(recs.len(), 540);
    assert!(recs.iter().all(|r| r.participant.starts_with(SYNTHETIC_PREFIX)));
    assert_eq!(write_long_format(&recs), a);
}

#[test]
fn ols_recovers_noiseless_line() {
    let recs: Vec<_> = (0..20)
        .map(|i| {
            let risk = [1u8, 3, 5, 7][i % 4];
            record(i, 1 + (i as u32 % 10), ResponseType::Comply, risk, 2 + (risk - 1) / 2, 4)
        })
        .collect();
    let fit = fit_blame_ols(&recs).unwrap();
    assert!((fit.model.intercept - 2.0).abs() < 1e-9);
    assert!((fit.model.risk_slope - 3.0).abs() < 1e-9);

    let flat: Vec<_> = recs.iter().map(|r| VignetteRecord { blame: 4, ..r.clone() }).collect();
    let fit = fit_blame_ols(&flat).unwrap();
    assert!((fit.model.intercept - 4.0).abs() < 1e-9 && fit.model.risk_slope.abs() < 1e-9);

    let constant_risk: Vec<_> = recs.iter().map(|r| VignetteRecord { perceived_risk: 4, ..r.clone() }).collect();
    assert!(matches!(fit_blame_ols(&constant_risk), Err(VignetteError::RankDeficient(_))));
}

#[test]
fn ols_offset_within_two_standard_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut recs = Vec::new();
    for i in 0..300 {
        let t = ResponseType::ALL[i % 3];
        let risk = rng.random_range(1..=7u8);
        // Comply is blamed one point more than either refusal.
        let base = if t == ResponseType::Comply { 4 } else { 3 };
        let blame = (base + rng.random_range(-1..=1i32)) as u8;
        recs.push(record(i / 10, 1 + (i % 10) as u32, t, risk, blame, 4));
    }
    let fit = fit_blame_ols(&recs).unwrap();
    assert_eq!(fit.reference, ResponseType::Comply);
    for (name, offset) in [
        ("empathic_refusal", fit.model.type_offsets.empathic_refusal),
        ("constructive_refusal", fit.model.type_offsets.constructive_refusal),
    ] {
        let se = fit.std_error(name).unwrap();
        assert!((offset + 1.0).abs() <= 2.0 * se, "{name}: {offset} ± {se}");
    }
}

proptest! {
    #[test]
    fn ols_matches_normal_equations(rows in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -5.0f64..5.0), 4..30)) {
        let n = rows.len();
        let x = DMatrix::from_fn(n, 3, |i, j| match j { 0 => 1.0, 1 => rows[i].0, _ => rows[i].1 });
        let y = DVector::from_iterator(n, rows.iter().map(|r| r.2));
        let xtx = x.transpose() * &x;
        prop_assume!(xtx.determinant().abs() > 1e-3);
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let sol = ols_solve(&x, &y, &names).unwrap();
        let direct = xtx.lu().solve(&(x.transpose() * &y)).unwrap();
        for j in 0..3 {
            prop_assert!((sol.coefficients[j] - direct[j]).abs() < 1e-9);
        }
    }
}

#[test]
fn trust_anchor_examples() {
    let all = |t: u8| vec![record(1, 1, ResponseType::Comply, 4, 4, t); 5];
    assert_eq!(compute_trust_anchor(&all(7)).unwrap(), 1.0);
    assert_eq!(compute_trust_anchor(&all(1)).unwrap(), 0.0);
    // Mean raw trust 5.2.
    let mixed: Vec<_> = [5u8, 5, 5, 5, 6].iter().map(|&t| record(1, 1, ResponseType::Comply, 4, 4, t)).collect();
    assert!((compute_trust_anchor(&mixed).unwrap() - 0.70).abs() < 1e-12);
    assert!(compute_trust_anchor(&[]).is_err());
}

fn endorsement_records(seed: u64, slope: f64, style_gap: f64) -> Vec<VignetteRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recs = Vec::new();
    for i in 0..400 {
        let t = if i % 2 == 0 { ResponseType::EmpathicRefusal } else { ResponseType::ConstructiveRefusal };
        let risk = rng.random_range(1..=7u8);
        let shift = if t == ResponseType::ConstructiveRefusal { style_gap } else { 0.0 };
        let p = 1.0 / (1.0 + (-(slope * (risk as f64 - 4.0) / 2.0 + shift)).exp());
        let appropriateness = if rng.random_bool(p) { 6 } else { 3 };
        recs.push(VignetteRecord {
            appropriateness,
            ..record(i / 10, 1 + (i % 10) as u32, t, risk, 3, 5)
        });
    }
    recs
}

fn moments(recs: &[VignetteRecord]) -> (f64, f64) {
    let v: Vec<f64> = recs.iter().map(normalized_risk).collect();
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt())
}

#[test]
fn logistic_slope_agrees_with_grid_search() {
    let recs = endorsement_records(1, 2.0, 0.0);
    let (m, s) = moments(&recs);
    let fit = fit_style_logits(&recs, m, s, 1.0).unwrap();
    assert!(fit.slope > 0.0);
    // Coarse grid over the slope with the other parameters at their optimum.
    let mut best = (f64::INFINITY, 0.0);
    for k in -40..=40 {
        let b = k as f64 * 0.1;
        let mut theta = fit.params();
        theta[1] = b;
        let nll = penalized_nll(&recs, m, s, 1.0, &theta);
        if nll < best.0 {
            best = (nll, b);
        }
    }
    assert!(best.1 > 0.0);
    assert!((best.1 - fit.slope).abs() <= 0.1);
    let optimum = penalized_nll(&recs, m, s, 1.0, &fit.params());
    assert!(optimum <= best.0 + 1e-9);
}

#[test]
fn logistic_regularization_and_symmetry() {
    let recs = endorsement_records(2, 2.0, 0.0);
    let (m, s) = moments(&recs);
    let mut last = f64::INFINITY;
    for l2 in [0.0, 0.1, 1.0, 10.0, 100.0, 1000.0] {
        let fit = fit_style_logits(&recs, m, s, l2).unwrap();
        assert!(fit.slope.abs() <= last + 1e-12, "l2 {l2}");
        last = fit.slope.abs();
    }
    let flat = endorsement_records(3, 0.0, 0.0);
    let (m, s) = moments(&flat);
    assert!(fit_style_logits(&flat, m, s, 1e6).unwrap().slope.abs() < 1e-3);

    // Mirror every empathic record as a constructive one with the same ratings.
    let mut mirrored: Vec<VignetteRecord> = recs.iter().filter(|r| r.response_type == ResponseType::EmpathicRefusal).cloned().collect();
    let copies: Vec<VignetteRecord> = mirrored
        .iter()
        .map(|r| VignetteRecord {
            response_type: ResponseType::ConstructiveRefusal,
            participant: format!("{}-c", r.participant),
            ..r.clone()
        })
        .collect();
    mirrored.extend(copies);
    let (m, s) = moments(&mirrored);
    let fit = fit_style_logits(&mirrored, m, s, 1.0).unwrap();
    assert!((fit.style_offsets.empathic - fit.style_offsets.constructive).abs() < 1e-6);

    let only_emp: Vec<_> = recs.iter().filter(|r| r.response_type == ResponseType::EmpathicRefusal).cloned().collect();
    assert!(fit_style_logits(&only_emp, m, s, 1.0).is_err());
}

#[test]
fn eta_examples() {
    let defaults = SocialConstants::default();
    let same: Vec<_> = (0..30).map(|i| record(i, 1, ResponseType::ALL[i % 3], 4, 4, 5)).collect();
    let d = derive_eta(&same, &EtaBounds::default(), &defaults).unwrap();
    for v in [d.eta.viol, d.eta.expl, d.eta.emp, d.eta.cons] {
        assert!((v - 0.125).abs() < 1e-12);
    }
    let b = EtaBounds { lo: 0.02, hi: 0.3 };
    assert!((b.rescale(0.5) - (0.02 + 0.28 * 0.75)).abs() < 1e-12);
    assert_eq!(b.rescale(-3.0), 0.02);

    // Known contrasts: comply trust 2, refusal trust 6, so the anchor is 14/3.
    let mut recs = Vec::new();
    for i in 0..30 {
        let t = ResponseType::ALL[i % 3];
        recs.push(record(i, 1, t, 4, 4, if t == ResponseType::Comply { 2 } else { 6 }));
    }
    let d = derive_eta(&recs, &b, &defaults).unwrap();
    let anchor = (1.0 / 6.0 + 2.0 * 5.0 / 6.0) / 3.0;
    assert!((d.effects.viol - (anchor - 1.0 / 6.0)).abs() < 1e-12);
    assert!((d.eta.viol - b.rescale(anchor - 1.0 / 6.0)).abs() < 1e-9);
    assert!((d.eta.expl - b.rescale(5.0 / 6.0 - anchor)).abs() < 1e-9);
}

#[test]
fn pipeline_round_trip_on_synthetic_cohort() {
    let recs = parse_long_format(&generate_synthetic(42, 54)).unwrap();
    let report = fit_constants(&recs, &FitOptions::default(), &SocialConstants::default()).unwrap();
    let c = report.constants;
    assert!((c.t_star - 0.70).abs() <= 0.02);
    assert!(c.synthetic);
    let mean_trust = |t: ResponseType| {
        let v: Vec<f64> = recs.iter().filter(|r| r.response_type == t).map(|r| r.trust as f64).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (a, e, k) = (
        mean_trust(ResponseType::Comply),
        mean_trust(ResponseType::EmpathicRefusal),
        mean_trust(ResponseType::ConstructiveRefusal),
    );
    assert!(a < e && e < k, "{a} {e} {k}");
    assert!(c.eta.viol > 0.125);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("constants.json");
    c.save(&path).unwrap();
    assert_eq!(FittedConstants::load(&path).unwrap(), c);
    let text = c.to_json().unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["blame", "t_star", "risk_mean", "risk_std", "logit", "eta", "lambda_T", "lambda_V"] {
        assert!(value.get(key).is_some(), "{key}");
    }

    // Refitting the re-exported data reproduces the constants.
    let again = parse_long_format(&write_long_format(&recs)).unwrap();
    let refit = fit_constants(&again, &FitOptions::default(), &SocialConstants::default()).unwrap();
    assert_eq!(refit.constants, c);

    let mut bad = value.clone();
    bad["risk_std"] = serde_json::json!(0.0);
    assert!(FittedConstants::from_json(&bad.to_string()).is_err());
}
