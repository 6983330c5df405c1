//! Randomized rounding of the keyword relaxation.
//!
//! Each phrase independently bids exact with probability `R[s]`, broad at
//! level `p` with probability `W[s][p] (1 - eps)`, and nothing otherwise.

use rand::Rng as _;
use serde::Serialize;

use super::relaxation::KeywordFractional;
use super::KeywordError;
use crate::model::{interpret_bid, BidVector, Instance};
use crate::rng::{self, Rng};

fn check_epsilon(epsilon: f64) -> Result<(), KeywordError> {
    if (0.0..1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(KeywordError::InvalidEpsilon(epsilon))
    }
}

/// Draws one bid; uses exactly one uniform per phrase.
pub fn round_bid(
    inst: &Instance,
    frac: &KeywordFractional,
    epsilon: f64,
    rng: &mut Rng,
) -> Result<BidVector, KeywordError> {
    check_epsilon(epsilon)?;
    let mut bid = BidVector::empty(inst.len());
    for s in inst.biddable() {
        let u: f64 = rng.random();
        let mut acc = frac.r[s];
        if u < acc {
            bid.set_exact(s, inst.query(s).cost);
            continue;
        }
        for (p, w) in frac.levels[s].iter().zip(&frac.w[s]) {
            acc += w * (1.0 - epsilon);
            if u < acc {
                bid.set_broad(s, *p);
                break;
            }
        }
    }
    Ok(bid)
}

/// Probability that the rounded bid wins `q`.
///
/// Phrases round independently, so `q` is missed exactly when every
/// matching phrase misses it. With at most two matchers this is the
/// inclusion-exclusion expression `(1-e)(Z_s + Z_r) - (1-e)^2 Z_s Z_r`.
pub fn selection_probability(
    inst: &Instance,
    frac: &KeywordFractional,
    epsilon: f64,
    q: usize,
) -> Result<f64, KeywordError> {
    check_epsilon(epsilon)?;
    let price = inst.query(q).cost;
    let mut miss = 1.0;
    for &s in inst.matchers(q) {
        let mut hit = (1.0 - epsilon) * frac.z_at(s, price);
        if s == q {
            hit += frac.r[s];
        }
        miss *= 1.0 - hit.min(1.0);
    }
    Ok(1.0 - miss)
}

/// Guaranteed expected utility `(1-e)(1-(1-e)/2) V - max(1, 2-2e) C`.
pub fn utility_bound(v_frac: f64, c_frac: f64, epsilon: f64) -> f64 {
    let keep = 1.0 - epsilon;
    keep * (1.0 - 0.5 * keep) * v_frac - f64::max(1.0, 2.0 * keep) * c_frac
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: u64,
    pub seed: u64,
    pub utility: f64,
    pub spend: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundingSummary {
    pub trials: u64,
    pub epsilon: f64,
    pub mean: f64,
    pub std: f64,
    pub bound: f64,
    pub bound_satisfied: bool,
    pub lp_objective: f64,
    pub v_frac: f64,
    pub c_frac: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundingReport {
    pub rows: Vec<TrialRow>,
    /// Fraction of trials in which each query was won.
    pub win_rates: Vec<f64>,
    pub summary: RoundingSummary,
}

/// Runs `trials` independent roundings; trial `i` uses
/// `derive_seed(seed, i)`.
pub fn rounding_experiment(
    inst: &Instance,
    frac: &KeywordFractional,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> Result<RoundingReport, KeywordError> {
    check_epsilon(epsilon)?;
    let mut rows = Vec::with_capacity(trials as usize);
    let mut wins = vec![0u64; inst.len()];
    for trial in 0..trials {
        let trial_seed = rng::derive_seed(seed, trial);
        let bid = round_bid(inst, frac, epsilon, &mut rng::seeded(trial_seed))?;
        let won = interpret_bid(inst, &bid);
        for &q in &won.members {
            wins[q] += 1;
        }
        rows.push(TrialRow {
            trial,
            seed: trial_seed,
            utility: won.utility.to_f64(),
            spend: won.cost_part.to_f64(),
            value: won.value_part.to_f64(),
        });
    }
    let n = trials.max(1) as f64;
    let mean = rows.iter().map(|r| r.utility).sum::<f64>() / n;
    let var = if trials > 1 {
        rows.iter().map(|r| (r.utility - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let std = var.sqrt();
    let bound = utility_bound(frac.v_frac, frac.c_frac, epsilon);
    Ok(RoundingReport {
        win_rates: wins.iter().map(|&w| w as f64 / n).collect(),
        summary: RoundingSummary {
            trials,
            epsilon,
            mean,
            std,
            bound,
            bound_satisfied: mean >= bound - 3.0 * std / n.sqrt(),
            lp_objective: frac.objective,
            v_frac: frac.v_frac,
            c_frac: frac.c_frac,
        },
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyword_solver::relaxation::solve_relaxation;
    use crate::model::{Clicks, Money, Query};

    fn two_matchers() -> Instance {
        let q = |id: &str, v: &str, c: &str, b: bool| Query {
            id: id.into(),
            value: v.parse().unwrap(),
            cost: c.parse().unwrap(),
            clicks: Clicks::ONE,
            biddable: b,
        };
        Instance::new(
            vec![
                q("r", "1", "1", true),
                q("s", "1", "1", true),
                q("x", "3", "1", false),
            ],
            vec![("r", "x"), ("s", "x")],
            None,
        )
        .unwrap()
    }

    fn frac(inst: &Instance, zr: f64, zs: f64) -> KeywordFractional {
        let mut f = solve_relaxation(inst).unwrap();
        f.w[0] = vec![zr];
        f.w[1] = vec![zs];
        f.r = vec![0.0; 3];
        f
    }

    #[test]
    fn probabilities() {
        let inst = two_matchers();
        let p = |f: &KeywordFractional, e| selection_probability(&inst, f, e, 2).unwrap();
        assert_eq!(p(&frac(&inst, 0.0, 0.0), 0.0), 0.0);
        assert_eq!(p(&frac(&inst, 1.0, 0.0), 0.0), 1.0);
        assert!((p(&frac(&inst, 0.5, 0.5), 0.0) - 0.75).abs() < 1e-12);
        assert!((p(&frac(&inst, 0.5, 0.5), 0.5) - (0.5 - 0.0625)).abs() < 1e-12);
    }

    #[test]
    fn bound_instances() {
        assert_eq!(utility_bound(4.0, 1.0, 0.0), 0.0);
        assert_eq!(utility_bound(8.0, 1.0, 0.5), 2.0);
        assert_eq!(utility_bound(6.0, 1.0, 0.0), 1.0);
    }

    #[test]
    fn pure_masses() {
        let inst = two_matchers();
        let mut f = frac(&inst, 0.0, 0.0);
        let mut rng = rng::seeded(1);
        assert!(round_bid(&inst, &f, 0.0, &mut rng).unwrap().is_empty());
        f.r = vec![1.0, 1.0, 0.0];
        let b = round_bid(&inst, &f, 0.5, &mut rng).unwrap();
        assert_eq!(b.get(0).exact, Some(Money::from_units(1)));
        assert_eq!(b.get(1).broad, None);
        assert!(round_bid(&inst, &f, 1.0, &mut rng).is_err());
    }

    #[test]
    fn half_epsilon_frequency() {
        let inst = two_matchers();
        let f = frac(&inst, 1.0, 0.0);
        let n = 10_000u64;
        let mut rng = rng::seeded(42);
        let hits = (0..n)
            .filter(|_| {
                round_bid(&inst, &f, 0.5, &mut rng)
                    .unwrap()
                    .get(0)
                    .broad
                    .is_some()
            })
            .count() as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((hits / n as f64 - 0.5).abs() <= 3.0 * sigma);
    }

    #[test]
    fn experiment_is_reproducible() {
        let inst = two_matchers();
        let f = frac(&inst, 0.5, 0.5);
        let a = rounding_experiment(&inst, &f, 0.0, 200, 9).unwrap();
        let b = rounding_experiment(&inst, &f, 0.0, 200, 9).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.summary, b.summary);
    }
}
