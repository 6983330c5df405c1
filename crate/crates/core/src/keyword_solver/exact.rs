//! Exact keyword-language optimum for small instances.
//!
//! Every phrase picks one pure strategy: no bid, exact at its own cost, or
//! broad at one of its price levels. Small products of choices are
//! enumerated outright; larger ones go to a depth-first branch-and-bound
//! that bounds with the relaxation and branches on the most fractional
//! phrase.

use serde::Serialize;

use super::relaxation::{build_ilp_approx, extract, price_levels, Choice, KeywordLp};
use super::KeywordError;
use crate::model::{interpret_bid, BidVector, Instance, Money, Weight, WinningSet};
use crate::query_solver::{Method, OptimalBidResult};
use crate::simplex::{self, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    /// Upper limit on enumerated bids or branch-and-bound nodes.
    pub max_nodes: u64,
    /// When false only broad bids are allowed.
    pub allow_exact: bool,
    /// Skip enumeration and always branch-and-bound.
    pub force_branch_and_bound: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            max_nodes: 1_000_000,
            allow_exact: true,
            force_branch_and_bound: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Enumeration,
    BranchAndBound,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSolution {
    pub result: OptimalBidResult,
    pub nodes: u64,
    pub strategy: Strategy,
}

fn choices(inst: &Instance, s: usize, allow_exact: bool) -> Vec<Choice> {
    let mut out = vec![Choice::None];
    if allow_exact {
        out.push(Choice::Exact);
    }
    out.extend((0..price_levels(inst, s).len()).map(Choice::Broad));
    out
}

fn apply(inst: &Instance, levels: &[Money], bid: &mut BidVector, s: usize, c: Choice) {
    bid.clear(s);
    match c {
        Choice::None => {}
        Choice::Exact => bid.set_exact(s, inst.query(s).cost),
        Choice::Broad(i) => bid.set_broad(s, levels[i]),
    }
}

fn finish(bid: BidVector, won: WinningSet) -> OptimalBidResult {
    OptimalBidResult {
        objective: won.utility,
        winning_set: won,
        bid,
        method: Method::KeywordExact,
    }
}

/// Exact optimum over all keyword-language bids.
pub fn solve_keyword_exact(
    inst: &Instance,
    options: ExactOptions,
) -> Result<ExactSolution, KeywordError> {
    let keywords: Vec<usize> = inst.biddable().collect();
    let options_per: Vec<Vec<Choice>> = keywords
        .iter()
        .map(|&s| choices(inst, s, options.allow_exact))
        .collect();
    let product = options_per
        .iter()
        .try_fold(1u64, |acc, o| acc.checked_mul(o.len() as u64));
    match product {
        Some(total) if total <= options.max_nodes && !options.force_branch_and_bound => {
            Ok(enumerate(inst, &keywords, &options_per, total))
        }
        _ => branch_and_bound(inst, &keywords, options),
    }
}

fn enumerate(
    inst: &Instance,
    keywords: &[usize],
    options_per: &[Vec<Choice>],
    total: u64,
) -> ExactSolution {
    let levels: Vec<Vec<_>> = keywords.iter().map(|&s| price_levels(inst, s)).collect();
    let mut digits = vec![0usize; keywords.len()];
    let mut bid = BidVector::empty(inst.len());
    let mut best = (interpret_bid(inst, &bid), bid.clone());
    for _ in 1..total {
        // mixed-radix increment, touching only the digits that change
        for (d, digit) in digits.iter_mut().enumerate() {
            *digit += 1;
            let wrapped = *digit == options_per[d].len();
            if wrapped {
                *digit = 0;
            }
            apply(
                inst,
                &levels[d],
                &mut bid,
                keywords[d],
                options_per[d][*digit],
            );
            if !wrapped {
                break;
            }
        }
        let won = interpret_bid(inst, &bid);
        if won.utility > best.0.utility {
            best = (won, bid.clone());
        }
    }
    ExactSolution {
        result: finish(best.1, best.0),
        nodes: total,
        strategy: Strategy::Enumeration,
    }
}

struct Search<'a> {
    inst: &'a Instance,
    layout: KeywordLp,
    allow_exact: bool,
    best: (WinningSet, BidVector),
    nodes: u64,
    max_nodes: u64,
}

/// Masses of each pure choice of `s` in a fractional solution.
fn masses(frac: &super::KeywordFractional, s: usize, allow_exact: bool) -> Vec<(Choice, f64)> {
    let broad: f64 = frac.w[s].iter().sum();
    let mut out = vec![(Choice::None, (1.0 - frac.r[s] - broad).max(0.0))];
    if allow_exact {
        out.push((Choice::Exact, frac.r[s]));
    }
    out.extend(
        frac.w[s]
            .iter()
            .enumerate()
            .map(|(i, &w)| (Choice::Broad(i), w)),
    );
    out
}

impl Search<'_> {
    fn offer(&mut self, bid: BidVector) {
        let won = interpret_bid(self.inst, &bid);
        if won.utility > self.best.0.utility {
            self.best = (won, bid);
        }
    }

    fn run(
        &mut self,
        keywords: &[usize],
        fixed: &mut Vec<Option<Choice>>,
    ) -> Result<(), KeywordError> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(KeywordError::NodeLimit(self.max_nodes));
        }
        let sol = simplex::solve(&self.layout.lp)?;
        match sol.status {
            Status::Optimal => {}
            Status::Infeasible => return Ok(()),
            other => return Err(KeywordError::LpStatus(other)),
        }
        let frac = extract(self.inst, &self.layout, &sol.values);
        let incumbent = self.best.0.utility.to_f64();
        if frac.objective <= incumbent + 1e-9 * incumbent.abs().max(1.0) {
            return Ok(());
        }

        // Round to the heaviest choice per phrase for a quick incumbent.
        let mut bid = BidVector::empty(self.inst.len());
        let mut branch: Option<(usize, f64)> = None;
        for (k, &s) in keywords.iter().enumerate() {
            let m = masses(&frac, s, self.allow_exact);
            let (choice, top) =
                m.iter()
                    .copied()
                    .fold((Choice::None, f64::NEG_INFINITY), |a, b| {
                        if b.1 > a.1 {
                            b
                        } else {
                            a
                        }
                    });
            apply(self.inst, &frac.levels[s], &mut bid, s, choice);
            let spread = 1.0 - top;
            if fixed[k].is_none() && spread > 1e-7 && branch.is_none_or(|(_, b)| spread > b) {
                branch = Some((k, spread));
            }
        }
        self.offer(bid);
        let Some((k, _)) = branch else {
            return Ok(());
        };

        let s = keywords[k];
        let mut order = masses(&frac, s, self.allow_exact);
        order.sort_by(|a, b| b.1.total_cmp(&a.1));
        for (choice, _) in order {
            self.layout.fix_choice(s, choice);
            fixed[k] = Some(choice);
            let outcome = self.run(keywords, fixed);
            fixed[k] = None;
            self.layout.release(s, self.allow_exact);
            outcome?;
        }
        Ok(())
    }
}

fn branch_and_bound(
    inst: &Instance,
    keywords: &[usize],
    options: ExactOptions,
) -> Result<ExactSolution, KeywordError> {
    let empty = BidVector::empty(inst.len());
    let mut search = Search {
        inst,
        layout: build_ilp_approx(inst, options.allow_exact),
        allow_exact: options.allow_exact,
        best: (interpret_bid(inst, &empty), empty),
        nodes: 0,
        max_nodes: options.max_nodes,
    };
    let mut fixed = vec![None; keywords.len()];
    search.run(keywords, &mut fixed)?;
    let (won, bid) = search.best;
    Ok(ExactSolution {
        result: finish(bid, won),
        nodes: search.nodes,
        strategy: Strategy::BranchAndBound,
    })
}

impl ExactSolution {
    pub fn utility(&self) -> Weight {
        self.result.objective
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::generate::independent_set;
    use crate::model::{Clicks, Query};

    fn q(id: &str, v: &str, c: &str, biddable: bool) -> Query {
        Query {
            id: id.into(),
            value: v.parse().unwrap(),
            cost: c.parse().unwrap(),
            clicks: Clicks::ONE,
            biddable,
        }
    }

    #[test]
    fn exact_beats_broad_when_dependent_is_costly() {
        let inst = Instance::new(
            vec![q("s", "2", "1", true), q("d", "-1", "1", false)],
            vec![("s", "d")],
            None,
        )
        .unwrap();
        for force in [false, true] {
            let opts = ExactOptions {
                force_branch_and_bound: force,
                ..Default::default()
            };
            let sol = solve_keyword_exact(&inst, opts).unwrap();
            assert_eq!(sol.utility(), Weight::from_f64(1.0));
            assert!(sol.result.bid.get(1).exact.is_some());
        }
        let broad_only = ExactOptions {
            allow_exact: false,
            ..Default::default()
        };
        assert_eq!(
            solve_keyword_exact(&inst, broad_only).unwrap().utility(),
            Weight::ZERO
        );
    }

    #[test]
    fn five_cycle() {
        let nodes: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        let edges: Vec<(String, String)> = (0..5)
            .map(|i| (i.to_string(), ((i + 1) % 5).to_string()))
            .collect();
        let inst = independent_set(&nodes, &edges).unwrap();
        for force in [false, true] {
            let opts = ExactOptions {
                force_branch_and_bound: force,
                ..Default::default()
            };
            assert_eq!(
                solve_keyword_exact(&inst, opts).unwrap().utility(),
                Weight::from_f64(2.0)
            );
        }
    }

    #[test]
    fn node_limit() {
        let nodes: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        let edges: Vec<(String, String)> = (0..5)
            .map(|i| (i.to_string(), ((i + 1) % 5).to_string()))
            .collect();
        let inst = independent_set(&nodes, &edges).unwrap();
        let opts = ExactOptions {
            max_nodes: 1,
            ..Default::default()
        };
        assert!(matches!(
            solve_keyword_exact(&inst, opts),
            Err(KeywordError::NodeLimit(1))
        ));
    }
}
