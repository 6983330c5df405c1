//! Keyword-pair simulation: exact plus broad match versus broad match only.
//!
//! Each run draws a [`simulation`](crate::baselines::generate::simulation)
//! instance from `derive_seed(seed, run)` and solves the keyword language
//! twice, once with exact bids allowed and once without.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::generate::{simulation, GenerateError};
use crate::keyword_solver::{
    build_ilp_approx, relaxation, rounding_experiment, solve_keyword_exact, ExactOptions,
    KeywordError,
};
use crate::rng::{derive_seed, PRNG_ALGORITHM};

/// Largest keyword count solved exactly without `bounds_ok`.
pub const MAX_EXACT_KEYWORDS: usize = 12;
/// Rounding trials per run in bounds mode.
pub const BOUNDS_TRIALS: u64 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactMethod {
    /// Enumerate every keyword choice.
    Brute,
    /// LP-bounded branch-and-bound.
    Bb,
    /// LP upper bounds and mean rounded utility, no exact solve.
    Bounds,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("{keywords} keywords exceeds the exact-solve limit of {limit}")]
    SizeLimit { keywords: usize, limit: usize },
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Keyword(#[from] KeywordError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRow {
    pub run: usize,
    pub seed: u64,
    /// Exact plus broad optimum, or its LP bound in bounds mode.
    pub exact_broad: f64,
    /// Broad-only optimum, or its LP bound in bounds mode.
    pub broad_only: f64,
    /// `exact_broad / broad_only`, absent when `broad_only` is 0.
    pub ratio: Option<f64>,
    /// Mean rounded utility with exact bids (bounds mode only).
    pub rounded_exact_broad: Option<f64>,
    /// Mean rounded utility without exact bids (bounds mode only).
    pub rounded_broad_only: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub keywords: usize,
    pub runs: usize,
    pub seed: u64,
    pub method: ExactMethod,
    pub prng: &'static str,
    pub rows: Vec<SimRow>,
    pub mean_exact_broad: f64,
    pub mean_broad_only: f64,
    pub mean_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    /// Broad-only never beats exact plus broad.
    pub dominance_holds: bool,
}

fn exact_value(
    inst: &crate::model::Instance,
    method: ExactMethod,
    allow_exact: bool,
) -> Result<f64, KeywordError> {
    let options = ExactOptions {
        max_nodes: if method == ExactMethod::Brute {
            u64::MAX
        } else {
            ExactOptions::default().max_nodes
        },
        allow_exact,
        force_branch_and_bound: method == ExactMethod::Bb,
    };
    Ok(solve_keyword_exact(inst, options)?.utility().to_f64())
}

fn bounds_row(
    inst: &crate::model::Instance,
    allow_exact: bool,
    seed: u64,
) -> Result<(f64, f64), KeywordError> {
    let layout = build_ilp_approx(inst, allow_exact);
    let frac = relaxation::solve_layout(inst, &layout)?;
    let rounded = rounding_experiment(inst, &frac, 0.0, BOUNDS_TRIALS, seed)?;
    Ok((frac.objective, rounded.summary.mean))
}

/// Runs the experiment. `bounds_ok` lets exact methods fall back to bounds
/// mode above [`MAX_EXACT_KEYWORDS`].
pub fn run_simulation(
    keywords: usize,
    runs: usize,
    seed: u64,
    method: ExactMethod,
    bounds_ok: bool,
) -> Result<SimReport, ExperimentError> {
    let mut method = method;
    if keywords > MAX_EXACT_KEYWORDS && method != ExactMethod::Bounds {
        if !bounds_ok {
            return Err(ExperimentError::SizeLimit {
                keywords,
                limit: MAX_EXACT_KEYWORDS,
            });
        }
        method = ExactMethod::Bounds;
    }
    let mut rows = Vec::with_capacity(runs);
    for run in 0..runs {
        let run_seed = derive_seed(seed, run as u64);
        let inst = simulation(keywords, run_seed)?;
        let row = if method == ExactMethod::Bounds {
            let (eb, eb_round) = bounds_row(&inst, true, run_seed)?;
            let (bo, bo_round) = bounds_row(&inst, false, run_seed)?;
            SimRow {
                run,
                seed: run_seed,
                exact_broad: eb,
                broad_only: bo,
                ratio: (bo > 0.0).then(|| eb / bo),
                rounded_exact_broad: Some(eb_round),
                rounded_broad_only: Some(bo_round),
            }
        } else {
            let eb = exact_value(&inst, method, true)?;
            let bo = exact_value(&inst, method, false)?;
            SimRow {
                run,
                seed: run_seed,
                exact_broad: eb,
                broad_only: bo,
                ratio: (bo > 0.0).then(|| eb / bo),
                rounded_exact_broad: None,
                rounded_broad_only: None,
            }
        };
        rows.push(row);
    }
    let n = runs.max(1) as f64;
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    Ok(SimReport {
        keywords,
        runs,
        seed,
        method,
        prng: PRNG_ALGORITHM,
        mean_exact_broad: rows.iter().map(|r| r.exact_broad).sum::<f64>() / n,
        mean_broad_only: rows.iter().map(|r| r.broad_only).sum::<f64>() / n,
        mean_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
        max_ratio: ratios.iter().copied().reduce(f64::max),
        dominance_holds: rows
            .iter()
            .all(|r| r.broad_only <= r.exact_broad + 1e-9 * r.exact_broad.abs().max(1.0)),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_agree_across_methods() {
        let brute = run_simulation(5, 3, 11, ExactMethod::Brute, false).unwrap();
        let bb = run_simulation(5, 3, 11, ExactMethod::Bb, false).unwrap();
        assert!(brute.dominance_holds);
        for (a, b) in brute.rows.iter().zip(&bb.rows) {
            assert!((a.exact_broad - b.exact_broad).abs() < 1e-9);
            assert!((a.broad_only - b.broad_only).abs() < 1e-9);
        }
    }

    #[test]
    fn size_limit_and_fallback() {
        assert!(matches!(
            run_simulation(13, 1, 0, ExactMethod::Brute, false),
            Err(ExperimentError::SizeLimit { .. })
        ));
        let r = run_simulation(13, 1, 0, ExactMethod::Brute, true).unwrap();
        assert_eq!(r.method, ExactMethod::Bounds);
        assert!(r.rows[0].rounded_exact_broad.is_some());
    }
}
