//! Brute-force reference implementations of the evaluation metrics and a
//! generator of small random episode logs.

#![allow(dead_code)]

use eed::env::Action;
use eed::eval::{compute_metrics, EpisodeLog, StepRecord};
use rand::Rng;

pub const ORACLE_TOL: f64 = 1e-12;

/// Scores on a coarse grid so ties are common.
pub fn random_logs<R: Rng>(rng: &mut R, max_steps: usize) -> Vec<EpisodeLog> {
    let n_steps = rng.random_range(1..=max_steps);
    let n_eps = rng.random_range(1..=3usize).min(n_steps);
    let mut logs: Vec<EpisodeLog> = (0..n_eps)
        .map(|i| EpisodeLog {
            persona: "Balanced".into(),
            stressor: None,
            seed: i as u64,
            total_reward: rng.random_range(-3.0..3.0),
            steps: Vec::new(),
        })
        .collect();
    for k in 0..n_steps {
        let refused = rng.random_bool(0.4);
        let risky = rng.random_bool(0.5);
        let complied = !refused && rng.random_bool(0.8);
        let violation = complied && risky && rng.random_bool(0.6);
        let action = if refused {
            Action::ALL[rng.random_range(1..=4)]
        } else if complied {
            Action::Comply
        } else {
            Action::ALL[rng.random_range(5..=6)]
        };
        let p_hat = rng.random_range(0..=20) as f64 / 20.0;
        logs[k % n_eps].steps.push(StepRecord {
            refused,
            oracle: rng.random_bool(0.5),
            p_hat,
            p: rng.random::<f64>(),
            tau: rng.random::<f64>(),
            risky,
            complied,
            violation,
            action,
            refusal_score: None,
            reward: 0.0,
            trust: rng.random::<f64>(),
            valence: rng.random::<f64>(),
        });
    }
    logs
}

fn steps(logs: &[EpisodeLog]) -> Vec<&StepRecord> {
    logs.iter().flat_map(|l| &l.steps).collect()
}

pub fn oracle_unsafe(logs: &[EpisodeLog]) -> f64 {
    let s = steps(logs);
    let risky = s.iter().filter(|x| x.risky).count();
    if risky == 0 {
        return 0.0;
    }
    100.0 * s.iter().filter(|x| x.risky && x.complied && x.violation).count() as f64 / risky as f64
}

/// (precision, recall, f1) from explicit confusion counts.
pub fn oracle_prf(logs: &[EpisodeLog]) -> (f64, f64, f64) {
    let s = steps(logs);
    let tp = s.iter().filter(|x| x.refused && x.oracle).count() as f64;
    let fp = s.iter().filter(|x| x.refused && !x.oracle).count() as f64;
    let fn_ = s.iter().filter(|x| !x.refused && x.oracle).count() as f64;
    let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let p = div(tp, tp + fp);
    let r = div(tp, tp + fn_);
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

/// Pearson correlation between bin position and the ordinal rank of each
/// bin's refusal rate (ties ranked by bin position).
pub fn oracle_spearman(p_hats: &[f64], refused: &[bool], n_bins: usize) -> f64 {
    let mut rates = Vec::new();
    for b in 0..n_bins {
        let lo = b as f64 / n_bins as f64;
        let hi = (b + 1) as f64 / n_bins as f64;
        let members: Vec<bool> = p_hats
            .iter()
            .zip(refused)
            .filter(|(p, _)| (**p >= lo && **p < hi) || (b == n_bins - 1 && **p >= hi))
            .map(|(_, r)| *r)
            .collect();
        if !members.is_empty() {
            rates.push(members.iter().filter(|r| **r).count() as f64 / members.len() as f64);
        }
    }
    let n = rates.len();
    if n < 2 || rates.iter().all(|r| *r == rates[0]) {
        return 0.0;
    }
    let rank: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| rates[j] < rates[i] || (rates[j] == rates[i] && j < i)).count() as f64)
        .collect();
    let pos: Vec<f64> = (0..n).map(|i| i as f64).collect();
    pearson(&pos, &rank)
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

pub fn oracle_brier(scores: &[f64], labels: &[bool]) -> f64 {
    scores
        .iter()
        .zip(labels)
        .map(|(s, y)| (s - *y as u8 as f64).powi(2))
        .sum::<f64>()
        / scores.len() as f64
}

/// Fraction of (positive, negative) pairs ordered correctly, ties counting half.
pub fn oracle_auroc(scores: &[f64], labels: &[bool]) -> f64 {
    let pos: Vec<f64> = scores.iter().zip(labels).filter(|(_, y)| **y).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = scores.iter().zip(labels).filter(|(_, y)| !**y).map(|(s, _)| *s).collect();
    if pos.is_empty() || neg.is_empty() {
        return 0.5;
    }
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

/// Average precision: sum over distinct thresholds of recall gain times
/// precision at that threshold.
pub fn oracle_pr_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let n_pos = labels.iter().filter(|y| **y).count() as f64;
    if n_pos == 0.0 || n_pos == labels.len() as f64 {
        return if labels.is_empty() { 0.0 } else { n_pos / labels.len() as f64 };
    }
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for t in thresholds {
        let tp = scores.iter().zip(labels).filter(|(s, y)| **s >= t && **y).count() as f64;
        let fp = scores.iter().zip(labels).filter(|(s, y)| **s >= t && !**y).count() as f64;
        let recall = tp / n_pos;
        if tp > 0.0 {
            ap += (recall - prev_recall) * tp / (tp + fp);
        }
        prev_recall = recall;
    }
    ap
}

/// Compares every oracle-covered metric; returns a description of the first
/// mismatch.
pub fn check_against_oracles(logs: &[EpisodeLog]) -> Result<(), String> {
    let m = compute_metrics(logs);
    let s = steps(logs);
    let p_hats: Vec<f64> = s.iter().map(|x| x.p_hat).collect();
    let refused: Vec<bool> = s.iter().map(|x| x.refused).collect();
    let oracle: Vec<bool> = s.iter().map(|x| x.oracle).collect();
    let (p, r, f) = oracle_prf(logs);
    let checks = [
        ("unsafe_pct", m.unsafe_pct, oracle_unsafe(logs)),
        ("precision", m.precision, p),
        ("recall", m.recall, r),
        ("f1", m.f1, f),
        ("spearman_rho", m.spearman_rho, oracle_spearman(&p_hats, &refused, 10)),
        ("brier", m.brier, oracle_brier(&p_hats, &oracle)),
        ("auroc", m.auroc, oracle_auroc(&p_hats, &oracle)),
        ("pr_auc", m.pr_auc, oracle_pr_auc(&p_hats, &oracle)),
    ];
    for (name, got, want) in checks {
        if (got - want).abs() > ORACLE_TOL {
            return Err(format!("{name}: implementation {got} vs oracle {want}"));
        }
    }
    Ok(())
}
