//! Persona catalog, trait-to-parameter mapping and stress-test overrides.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper end of the observation-noise range, matching the `noise_high` stressor.
pub const SIGMA_MAX: f64 = 0.6;
/// Scale of the threshold couplings, matching the ±0.60 stressor overrides.
pub const COUPLING_SCALE: f64 = 0.6;
/// Leak rate of a perfectly inconsistent partner.
pub const LEAK_SCALE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Training,
    Holdout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonaTraits {
    pub name: String,
    pub risk_tol: f64,
    pub impatience: f64,
    pub receptivity: f64,
    pub consistency: f64,
    pub split: Split,
}

impl PersonaTraits {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("risk_tol", self.risk_tol),
            ("impatience", self.impatience),
            ("receptivity", self.receptivity),
            ("consistency", self.consistency),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!(
                    "persona `{}`: trait {field} = {v} outside [0, 1]",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Normalized trait vector in observation order.
    pub fn as_array(&self) -> [f64; 4] {
        [self.risk_tol, self.impatience, self.receptivity, self.consistency]
    }
}

/// Environment parameters derived from a persona's traits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonaProfile {
    pub traits: PersonaTraits,
    pub p_viol: f64,
    pub sigma0: f64,
    pub c_trust: f64,
    pub c_val: f64,
    #[serde(rename = "lambda_T")]
    pub lambda_trust: f64,
    #[serde(rename = "lambda_V")]
    pub lambda_valence: f64,
    pub eta_scale: f64,
}

/// Table overrides for stress-test evaluation. Every present field is an
/// absolute replacement, including negative couplings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stressor {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_viol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_trust: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_val: Option<f64>,
}

pub fn traits_to_profile(traits: &PersonaTraits) -> Result<PersonaProfile> {
    traits.validate()?;
    Ok(PersonaProfile {
        p_viol: traits.risk_tol,
        sigma0: SIGMA_MAX * traits.impatience,
        c_trust: COUPLING_SCALE * traits.receptivity,
        c_val: COUPLING_SCALE * (1.0 - traits.consistency),
        lambda_trust: LEAK_SCALE * (1.0 - traits.consistency),
        lambda_valence: LEAK_SCALE * (1.0 - traits.consistency),
        eta_scale: 0.5 + 0.5 * traits.consistency,
        traits: traits.clone(),
    })
}

pub fn apply_stressor(profile: &PersonaProfile, stressor: &Stressor) -> PersonaProfile {
    let mut out = profile.clone();
    if let Some(s) = stressor.sigma {
        out.sigma0 = s;
    }
    if let Some(p) = stressor.p_viol {
        out.p_viol = p;
    }
    if let Some(c) = stressor.c_trust {
        out.c_trust = c;
    }
    if let Some(c) = stressor.c_val {
        out.c_val = c;
    }
    out
}

fn persona(
    name: &str,
    risk_tol: f64,
    impatience: f64,
    receptivity: f64,
    consistency: f64,
    split: Split,
) -> PersonaTraits {
    PersonaTraits {
        name: name.to_string(),
        risk_tol,
        impatience,
        receptivity,
        consistency,
        split,
    }
}

/// The seven canonical personas: four training, three holdout.
pub fn catalog() -> Vec<PersonaTraits> {
    use Split::*;
    vec![
        persona("Conservative", 0.2, 0.3, 0.7, 0.9, Training),
        persona("Balanced", 0.5, 0.4, 0.5, 0.8, Training),
        persona("Risk-Seeking", 0.8, 0.6, 0.4, 0.7, Training),
        persona("Impatient-Receptive", 0.4, 0.7, 0.9, 0.85, Training),
        persona("Unpredict.-Detached", 0.6, 0.2, 0.3, 0.6, Holdout),
        persona("Risky-Impat.-LowRec", 0.9, 0.7, 0.2, 0.6, Holdout),
        persona("Cautious-Impat.-Rec", 0.1, 0.8, 0.8, 0.7, Holdout),
    ]
}

pub fn training_personas() -> Vec<PersonaTraits> {
    catalog()
        .into_iter()
        .filter(|p| p.split == Split::Training)
        .collect()
}

pub fn holdout_personas() -> Vec<PersonaTraits> {
    catalog()
        .into_iter()
        .filter(|p| p.split == Split::Holdout)
        .collect()
}

fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase()
}

/// Looks a persona up by name, ignoring case and punctuation
/// (`"risk_seeking"` finds `Risk-Seeking`).
pub fn find_persona(name: &str) -> Result<PersonaTraits> {
    let key = normalize(name);
    catalog()
        .into_iter()
        .find(|p| normalize(&p.name) == key)
        .ok_or_else(|| Error::UnknownPersona(name.to_string()))
}

fn stressor(
    name: &str,
    sigma: Option<f64>,
    p_viol: Option<f64>,
    c_trust: Option<f64>,
    c_val: Option<f64>,
) -> Stressor {
    Stressor {
        name: name.to_string(),
        sigma,
        p_viol,
        c_trust,
        c_val,
    }
}

/// The nine canonical stress-test perturbations.
pub fn stressors() -> Vec<Stressor> {
    vec![
        stressor("base", None, None, None, None),
        stressor("noise_med", Some(0.20), None, None, None),
        stressor("noise_high", Some(0.60), None, None, None),
        stressor("risky_base_low", None, Some(0.10), None, None),
        stressor("risky_base_high", None, Some(0.95), None, None),
        stressor("corr_flip", None, None, None, Some(-0.60)),
        stressor("distrusting_user", None, None, Some(-0.60), None),
        stressor("forgiving_user", None, None, Some(0.60), None),
        stressor("adversarial_mix", Some(0.40), Some(0.80), Some(-0.60), Some(-0.60)),
    ]
}

pub fn find_stressor(name: &str) -> Result<Stressor> {
    stressors()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownStressor(name.to_string()))
}

/// User-defined personas and stressors loaded from JSON.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogFile {
    #[serde(default)]
    pub personas: Vec<PersonaTraits>,
    #[serde(default)]
    pub stressors: Vec<Stressor>,
}

impl CatalogFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: CatalogFile = serde_json::from_str(text)?;
        for p in &file.personas {
            p.validate()?;
        }
        Ok(file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn catalog_matches_table() {
        let expected: [(&str, [f64; 4], Split); 7] = [
            ("Conservative", [0.2, 0.3, 0.7, 0.9], Split::Training),
            ("Balanced", [0.5, 0.4, 0.5, 0.8], Split::Training),
            ("Risk-Seeking", [0.8, 0.6, 0.4, 0.7], Split::Training),
            ("Impatient-Receptive", [0.4, 0.7, 0.9, 0.85], Split::Training),
            ("Unpredict.-Detached", [0.6, 0.2, 0.3, 0.6], Split::Holdout),
            ("Risky-Impat.-LowRec", [0.9, 0.7, 0.2, 0.6], Split::Holdout),
            ("Cautious-Impat.-Rec", [0.1, 0.8, 0.8, 0.7], Split::Holdout),
        ];
        let cat = catalog();
        assert_eq!(cat.len(), 7);
        for (p, (name, traits, split)) in cat.iter().zip(expected) {
            assert_eq!(p.name, name);
            assert_eq!(p.as_array(), traits);
            assert_eq!(p.split, split);
        }
        assert_eq!(find_persona("Conservative").unwrap().risk_tol, 0.2);
        assert_eq!(training_personas().len(), 4);
        assert_eq!(holdout_personas().len(), 3);
    }

    #[test]
    fn lookup_is_lenient() {
        assert_eq!(find_persona("risk_seeking").unwrap().name, "Risk-Seeking");
        assert_eq!(
            find_persona("unpredict-detached").unwrap().name,
            "Unpredict.-Detached"
        );
        assert!(matches!(find_persona("nobody"), Err(Error::UnknownPersona(_))));
    }

    #[test]
    fn balanced_profile() {
        let p = traits_to_profile(&find_persona("Balanced").unwrap()).unwrap();
        assert_eq!(p.p_viol, 0.5);
        assert!((p.sigma0 - 0.24).abs() < 1e-12);
        assert!((p.c_trust - 0.30).abs() < 1e-12);
        assert!((p.c_val - 0.12).abs() < 1e-12);
    }

    #[test]
    fn extreme_traits() {
        let mut t = find_persona("Balanced").unwrap();
        t.risk_tol = 0.0;
        t.consistency = 1.0;
        let p = traits_to_profile(&t).unwrap();
        assert_eq!(p.p_viol, 0.0);
        assert_eq!(p.c_val, 0.0);
        assert_eq!(p.lambda_trust, 0.0);
        assert_eq!(p.lambda_valence, 0.0);
        assert_eq!(p.eta_scale, 1.0);

        t.impatience = 1.2;
        assert!(traits_to_profile(&t).is_err());
    }

    #[test]
    fn stressor_table() {
        let s = stressors();
        let names: Vec<_> = s.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "base",
                "noise_med",
                "noise_high",
                "risky_base_low",
                "risky_base_high",
                "corr_flip",
                "distrusting_user",
                "forgiving_user",
                "adversarial_mix"
            ]
        );
        let cells: Vec<_> = s.iter().map(|s| (s.sigma, s.p_viol, s.c_trust, s.c_val)).collect();
        assert_eq!(
            cells,
            [
                (None, None, None, None),
                (Some(0.20), None, None, None),
                (Some(0.60), None, None, None),
                (None, Some(0.10), None, None),
                (None, Some(0.95), None, None),
                (None, None, None, Some(-0.60)),
                (None, None, Some(-0.60), None),
                (None, None, Some(0.60), None),
                (Some(0.40), Some(0.80), Some(-0.60), Some(-0.60)),
            ]
        );
    }

    #[test]
    fn stressor_application() {
        let base = traits_to_profile(&find_persona("Balanced").unwrap()).unwrap();
        assert_eq!(apply_stressor(&base, &find_stressor("base").unwrap()), base);

        let noisy = apply_stressor(&base, &find_stressor("noise_high").unwrap());
        assert_eq!(noisy.sigma0, 0.60);
        assert_eq!(
            PersonaProfile {
                sigma0: base.sigma0,
                ..noisy
            },
            base
        );

        let adv = apply_stressor(&base, &find_stressor("adversarial_mix").unwrap());
        assert_eq!(
            (adv.sigma0, adv.p_viol, adv.c_trust, adv.c_val),
            (0.40, 0.80, -0.60, -0.60)
        );
    }

    #[test]
    fn catalog_file_roundtrip() {
        let file = CatalogFile {
            personas: vec![find_persona("Balanced").unwrap()],
            stressors: vec![find_stressor("corr_flip").unwrap()],
        };
        let text = serde_json::to_string(&file).unwrap();
        let back = CatalogFile::from_json(&text).unwrap();
        assert_eq!(back.personas, file.personas);
        assert_eq!(back.stressors, file.stressors);
        assert!(CatalogFile::from_json(r#"{"personas": [], "extra": 1}"#).is_err());
    }

    proptest! {
        #[test]
        fn mapping_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let mk = |x: f64| persona("x", x, x, x, x, Split::Training);
            let (plo, phi) = (traits_to_profile(&mk(lo)).unwrap(), traits_to_profile(&mk(hi)).unwrap());
            prop_assert!(plo.p_viol <= phi.p_viol);
            prop_assert!(plo.sigma0 <= phi.sigma0);
            prop_assert!(plo.c_val >= phi.c_val);
            prop_assert!((0.0..=SIGMA_MAX).contains(&phi.sigma0));
        }
    }
}
