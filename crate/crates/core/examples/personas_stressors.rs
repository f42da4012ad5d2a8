//! The persona catalog, the derived environment parameters, and every
//! stress-test perturbation applied to one holdout persona.

use eed::personas::{apply_stressor, catalog, find_persona, stressors, traits_to_profile};

fn main() -> eed::Result<()> {
    println!(
        "{:<20} {:>8} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
        "persona", "split", "p_viol", "sigma", "c_tr", "c_val", "leak", "eta_x"
    );
    for traits in catalog() {
        let p = traits_to_profile(&traits)?;
        println!(
            "{:<20} {:>8} {:>6.2} {:>6.2} {:>6.2} {:>6.2} {:>6.3} {:>6.2}",
            traits.name,
            format!("{:?}", traits.split),
            p.p_viol,
            p.sigma0,
            p.c_trust,
            p.c_val,
            p.lambda_trust,
            p.eta_scale
        );
    }

    let holdout = catalog().into_iter().next_back().expect("catalog is not empty");
    let base = traits_to_profile(&find_persona(&holdout.name)?)?;
    println!("\nstressors applied to {}:", holdout.name);
    for s in stressors() {
        let p = apply_stressor(&base, &s);
        println!(
            "  {:<18} sigma {:.2}  p_viol {:.2}  c_trust {:+.2}  c_val {:+.2}",
            s.name, p.sigma0, p.p_viol, p.c_trust, p.c_val
        );
    }
    Ok(())
}
