//! Synthetic vignette ratings with published aggregate statistics.
//!
//! Ratings are rounded Gaussians clipped to 1..=7 around per-type means.
//! Trust ratings are then nudged one point at a time until each response
//! type's trust total is the integer closest to its target mean times its
//! count. Participant ids carry [`SYNTHETIC_PREFIX`] so generated data is
//! never mistaken for real ratings.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{rescale_rating, write_long_format, ResponseType, VignetteRecord};
use crate::policies::sigmoid;

pub const SYNTHETIC_PREFIX: &str = "SYN-";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub n_participants: usize,
    pub n_scenarios: u32,
    /// Share of vignettes showing unsafe compliance; refusal types split the
    /// rest evenly.
    pub comply_share: f64,
    /// Target mean trust for comply, empathic and constructive responses.
    pub trust_means: [f64; 3],
    /// Perceived-risk levels of the first and last scenario.
    pub risk_range: (f64, f64),
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_participants: 54,
            n_scenarios: 10,
            comply_share: 0.289,
            trust_means: [2.84, 6.11, 6.20],
            risk_range: (0.3, 0.95),
        }
    }
}

fn type_index(t: ResponseType) -> usize {
    match t {
        ResponseType::Comply => 0,
        ResponseType::EmpathicRefusal => 1,
        ResponseType::ConstructiveRefusal => 2,
    }
}

fn rating<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> u8 {
    let v: f64 = Normal::new(mean, sd).expect("positive sd").sample(rng);
    v.round().clamp(1.0, 7.0) as u8
}

pub fn generate_synthetic_records(spec: &SyntheticSpec, seed: u64) -> Vec<VignetteRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = spec.n_participants * spec.n_scenarios as usize;
    let n_comply = ((total as f64) * spec.comply_share).round() as usize;
    let n_emp = (total - n_comply).div_ceil(2);
    let mut types: Vec<ResponseType> = std::iter::repeat_n(ResponseType::Comply, n_comply)
        .chain(std::iter::repeat_n(ResponseType::EmpathicRefusal, n_emp))
        .chain(std::iter::repeat_n(ResponseType::ConstructiveRefusal, total - n_comply - n_emp))
        .collect();
    types.shuffle(&mut rng);

    let (r_lo, r_hi) = spec.risk_range;
    let level = |s: u32| {
        if spec.n_scenarios <= 1 {
            r_lo
        } else {
            r_lo + (r_hi - r_lo) * (s - 1) as f64 / (spec.n_scenarios - 1) as f64
        }
    };

    let mut records = Vec::with_capacity(total);
    for p in 0..spec.n_participants {
        for s in 1..=spec.n_scenarios {
            let t = types[p * spec.n_scenarios as usize + (s - 1) as usize];
            let perceived_risk = rating(&mut rng, 1.0 + 6.0 * level(s), 0.7);
            let r = rescale_rating(perceived_risk as f64);
            let endorse = sigmoid(6.0 * (r - 0.5));
            let (appr, safety, empathy, blame) = match t {
                ResponseType::Comply => (1.0 + 4.2 * (1.0 - endorse), 2.6 - r, 2.6, 3.8 + 2.4 * r),
                ResponseType::EmpathicRefusal => (1.0 + 6.0 * endorse, 5.6, 6.1, 2.3 + 0.4 * r),
                ResponseType::ConstructiveRefusal => (1.3 + 6.0 * endorse, 6.1, 5.3, 2.1 + 0.4 * r),
            };
            records.push(VignetteRecord {
                participant: format!("{SYNTHETIC_PREFIX}P{:02}", p + 1),
                scenario: s,
                response_type: t,
                appropriateness: rating(&mut rng, appr, 0.8),
                safety: rating(&mut rng, safety, 0.8),
                trust: rating(&mut rng, spec.trust_means[type_index(t)], 0.9),
                empathy: rating(&mut rng, empathy, 0.8),
                blame: rating(&mut rng, blame, 0.8),
                perceived_risk,
                comprehension: rating(&mut rng, 6.2, 0.6),
            });
        }
    }
    match_trust_totals(&mut records, spec, &mut rng);
    records
}

fn match_trust_totals<R: Rng + ?Sized>(records: &mut [VignetteRecord], spec: &SyntheticSpec, rng: &mut R) {
    for t in ResponseType::ALL {
        let idx: Vec<usize> = (0..records.len()).filter(|&i| records[i].response_type == t).collect();
        if idx.is_empty() {
            continue;
        }
        let target = (spec.trust_means[type_index(t)] * idx.len() as f64)
            .round()
            .clamp(idx.len() as f64, 7.0 * idx.len() as f64) as i64;
        let mut sum: i64 = idx.iter().map(|&i| records[i].trust as i64).sum();
        while sum != target {
            let i = idx[rng.random_range(0..idx.len())];
            let tr = &mut records[i].trust;
            if sum < target && *tr < 7 {
                *tr += 1;
                sum += 1;
            } else if sum > target && *tr > 1 {
                *tr -= 1;
                sum -= 1;
            }
        }
    }
}

/// CSV bytes for `n_participants` synthetic participants.
pub fn generate_synthetic(seed: u64, n_participants: usize) -> Vec<u8> {
    let spec = SyntheticSpec {
        n_participants,
        ..SyntheticSpec::default()
    };
    write_long_format(&generate_synthetic_records(&spec, seed))
}
