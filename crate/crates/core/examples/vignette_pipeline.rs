//! Generates a synthetic ratings cohort, fits the vignette constants and
//! shows how they reshape the social dynamics and the vignette-gate policy.

use eed::social::SocialConstants;
use eed::vignette::{fit_constants, generate_synthetic, parse_long_format, FitOptions};

fn main() -> eed::Result<()> {
    let csv = generate_synthetic(42, 54);
    let records = parse_long_format(&csv)?;
    println!("{} ratings from {} bytes of CSV", records.len(), csv.len());

    let report = fit_constants(&records, &FitOptions::default(), &SocialConstants::default())?;
    let c = &report.constants;
    let b = &report.blame;
    println!("blame model (reference level {:?}):", b.reference);
    for (name, coef) in b.names.iter().zip(&b.solution.coefficients) {
        let se = b.std_error(name).unwrap_or(f64::NAN);
        println!("  {name:<24} {coef:+.3} (se {se:.3})");
    }
    println!("trust anchor t* = {:.3}", c.t_star);
    println!(
        "endorsement logit: intercept {:+.3}, slope {:+.3}, empathic {:+.3}, constructive {:+.3}",
        c.logit.intercept, c.logit.slope, c.logit.style_offsets.empathic, c.logit.style_offsets.constructive
    );
    println!("trust/valence deltas: {:?}", c.eta);
    println!("tuned risk threshold for RR: {:.3}", c.rr_tau0);

    let gate = c.gate_model()?;
    for p_hat in [0.2, 0.4, 0.5, 0.6, 0.8] {
        println!("  gate P(refuse | p_hat = {p_hat:.1}) = {:.3}", gate.refusal_probability(p_hat));
    }
    println!("\nconstants file:\n{}", c.to_json()?);
    Ok(())
}
