//! Exhaustive reference solvers for small instances.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{
    interpret_bid, BidVector, DependencyGraph, Instance, Money, Weight, WinningSet,
};
use crate::query_solver::{Method, OptimalBidResult, SolveError};

/// Largest instance [`brute_force_query`] enumerates.
pub const MAX_QUERY_ORACLE: usize = 22;
/// Largest instance [`brute_force_budgeted_integral`] accepts.
pub const MAX_BUDGETED_ORACLE: usize = 128;
/// Search-node budget shared by the pruned and product enumerations.
pub const DEFAULT_NODE_LIMIT: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance has {size} queries; the oracle handles at most {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("oracle search exceeded {0} nodes")]
    NodeLimit(u64),
    #[error("instance has no budget")]
    MissingBudget,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Bitmask of `closure({q})` for every `q`.
fn forced_masks(dg: &DependencyGraph, n: usize) -> Vec<u128> {
    (0..n)
        .map(|q| {
            dg.closure([q].iter())
                .into_iter()
                .fold(0u128, |m, x| m | 1 << x)
        })
        .collect()
}

/// Maximum utility over all closed subsets, by plain enumeration.
pub fn brute_force_query(inst: &Instance) -> Result<OptimalBidResult, OracleError> {
    let n = inst.len();
    if n > MAX_QUERY_ORACLE {
        return Err(OracleError::TooLarge {
            size: n,
            limit: MAX_QUERY_ORACLE,
        });
    }
    let dg = DependencyGraph::derive(inst);
    let direct: Vec<u32> = (0..n)
        .map(|s| dg.consequents(s).iter().fold(0u32, |m, &q| m | 1 << q))
        .collect();
    let weights: Vec<i128> = inst.weights().iter().map(|w| w.raw()).collect();
    let mut best = (0i128, 0u32);
    for mask in 0u32..(1u32 << n) {
        let mut closed = true;
        let mut total = 0i128;
        let mut rest = mask;
        while rest != 0 {
            let q = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if direct[q] & !mask != 0 {
                closed = false;
                break;
            }
            total += weights[q];
        }
        if closed && total > best.0 {
            best = (total, mask);
        }
    }
    let members: BTreeSet<usize> = (0..n).filter(|&q| best.1 >> q & 1 == 1).collect();
    Ok(OptimalBidResult::from_set(
        inst,
        &dg,
        members,
        Method::Oracle,
    )?)
}

/// Best closed set under a spend budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetedIntegral {
    pub members: BTreeSet<usize>,
    /// `Σ v n` over the members.
    pub value: Weight,
    /// `Σ c n` over the members.
    pub spend: Weight,
}

struct BudgetSearch<'a> {
    n: usize,
    forced: &'a [u128],
    forcing: &'a [u128],
    values: &'a [i128],
    costs: &'a [i128],
    budget: i128,
    best: (i128, u128),
    nodes: u64,
    limit: u64,
}

impl BudgetSearch<'_> {
    fn sum(xs: &[i128], mut mask: u128) -> i128 {
        let mut total = 0;
        while mask != 0 {
            total += xs[mask.trailing_zeros() as usize];
            mask &= mask - 1;
        }
        total
    }

    fn run(&mut self, i: usize, inc: u128, exc: u128, spend: i128, value: i128) -> Result<(), u64> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(self.limit);
        }
        if value > self.best.0 {
            self.best = (value, inc);
        }
        let Some(q) = (i..self.n).find(|&q| (inc | exc) >> q & 1 == 0) else {
            return Ok(());
        };
        let open = !(inc | exc) & (u128::MAX >> (128 - self.n));
        let optimistic = value + Self::sum(self.values, open & self.positive_mask());
        if optimistic <= self.best.0 {
            return Ok(());
        }
        let added = self.forced[q] & !inc;
        if added & exc == 0 {
            let spend2 = spend + Self::sum(self.costs, added);
            if spend2 <= self.budget {
                let value2 = value + Self::sum(self.values, added);
                self.run(q + 1, inc | added, exc, spend2, value2)?;
            }
        }
        let barred = self.forcing[q] & !exc;
        if barred & inc == 0 {
            self.run(q + 1, inc, exc | barred, spend, value)?;
        }
        Ok(())
    }

    fn positive_mask(&self) -> u128 {
        (0..self.n)
            .filter(|&q| self.values[q] > 0)
            .fold(0, |m, q| m | 1 << q)
    }
}

/// Maximum `Σ v n` over closed sets with `Σ c n <= budget`, by
/// include/exclude search with closure propagation and pruning.
pub fn brute_force_budgeted_integral(
    inst: &Instance,
    budget: Option<Money>,
    node_limit: u64,
) -> Result<BudgetedIntegral, OracleError> {
    let n = inst.len();
    if n > MAX_BUDGETED_ORACLE {
        return Err(OracleError::TooLarge {
            size: n,
            limit: MAX_BUDGETED_ORACLE,
        });
    }
    let budget = budget.or(inst.budget()).ok_or(OracleError::MissingBudget)?;
    let dg = DependencyGraph::derive(inst);
    let forced = forced_masks(&dg, n);
    let forcing: Vec<u128> = (0..n)
        .map(|q| {
            (0..n)
                .filter(|&p| forced[p] >> q & 1 == 1)
                .fold(0, |m, p| m | 1 << p)
        })
        .collect();
    let values: Vec<i128> = inst
        .queries()
        .iter()
        .map(|q| q.value_total().raw())
        .collect();
    let costs: Vec<i128> = inst
        .queries()
        .iter()
        .map(|q| q.cost_total().raw())
        .collect();
    let mut search = BudgetSearch {
        n,
        forced: &forced,
        forcing: &forcing,
        values: &values,
        costs: &costs,
        budget: budget.to_weight().raw(),
        best: (0, 0),
        nodes: 0,
        limit: node_limit,
    };
    search.run(0, 0, 0, 0, 0).map_err(OracleError::NodeLimit)?;
    let members: BTreeSet<usize> = (0..n).filter(|&q| search.best.1 >> q & 1 == 1).collect();
    let spend = members.iter().map(|&q| Weight(costs[q])).sum();
    Ok(BudgetedIntegral {
        value: Weight(search.best.0),
        spend,
        members,
    })
}

/// Every bid a keyword could usefully place: nothing, exact at its own
/// cost, or broad at the cost of any query it matches.
fn keyword_options(inst: &Instance, s: usize) -> Vec<(Option<Money>, Option<Money>)> {
    let mut levels: Vec<Money> = inst
        .matched_by(s)
        .iter()
        .map(|&q| inst.query(q).cost)
        .collect();
    levels.push(inst.query(s).cost);
    levels.sort();
    levels.dedup();
    let mut options = vec![(None, None), (Some(inst.query(s).cost), None)];
    options.extend(levels.into_iter().map(|p| (None, Some(p))));
    options
}

/// Best keyword-language bid under a spend budget, maximizing `Σ v n` of
/// the won set, by enumerating every combination of keyword options.
pub fn brute_force_keyword_budgeted(
    inst: &Instance,
    budget: Option<Money>,
    node_limit: u64,
) -> Result<(BidVector, WinningSet), OracleError> {
    let budget = budget
        .or(inst.budget())
        .ok_or(OracleError::MissingBudget)?
        .to_weight();
    let keywords: Vec<usize> = inst.biddable().collect();
    let options: Vec<_> = keywords.iter().map(|&s| keyword_options(inst, s)).collect();
    let total = options
        .iter()
        .try_fold(1u64, |acc, o| acc.checked_mul(o.len() as u64))
        .filter(|&t| t <= node_limit)
        .ok_or(OracleError::NodeLimit(node_limit))?;
    let mut best: Option<(BidVector, WinningSet)> = None;
    for code in 0..total {
        let mut bid = BidVector::empty(inst.len());
        let mut rest = code;
        for (&s, opts) in keywords.iter().zip(&options) {
            let (exact, broad) = opts[(rest % opts.len() as u64) as usize];
            rest /= opts.len() as u64;
            if let Some(e) = exact {
                bid.set_exact(s, e);
            }
            if let Some(b) = broad {
                bid.set_broad(s, b);
            }
        }
        let won = interpret_bid(inst, &bid);
        if won.cost_part > budget {
            continue;
        }
        if best
            .as_ref()
            .is_none_or(|(_, b)| won.value_part > b.value_part)
        {
            best = Some((bid, won));
        }
    }
    Ok(best.expect("the empty bid is always within budget"))
}

/// Size of a maximum independent set, by enumerating node subsets.
pub fn max_independent_set(n: usize, edges: &[(usize, usize)]) -> usize {
    assert!(n <= 24, "graph too large for enumeration");
    (0u32..1 << n)
        .filter(|mask| {
            edges
                .iter()
                .all(|&(u, v)| mask >> u & 1 == 0 || mask >> v & 1 == 0)
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// Best total weight of elements covered by at most `k` sets.
pub fn max_k_coverage(sets: &[Vec<usize>], weights: &[Money], k: usize) -> Money {
    assert!(sets.len() <= 24, "too many sets for enumeration");
    (0u32..1 << sets.len())
        .filter(|mask| mask.count_ones() as usize <= k)
        .map(|mask| {
            let covered: BTreeSet<usize> = (0..sets.len())
                .filter(|i| mask >> i & 1 == 1)
                .flat_map(|i| sets[i].iter().copied())
                .collect();
            Money::from_micros(covered.iter().map(|&e| weights[e].micros()).sum())
        })
        .max()
        .unwrap_or(Money::ZERO)
}
