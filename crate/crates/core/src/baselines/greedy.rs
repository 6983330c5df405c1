//! One-step greedy heuristics in the query language.
//!
//! Adding a query drags in everything it forces, so a candidate's marginal
//! utility is `u(T ∪ closure({q})) - u(T)`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{DependencyGraph, Instance};
use crate::query_solver::{Method, OptimalBidResult, SolveError};

/// Ratio used by [`max_rate_greedy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rate {
    ProfitOverCost,
    ValueOverCost,
}

struct Marginal {
    added: Vec<usize>,
    profit: i128,
    value: i128,
    cost: i128,
}

struct Greedy<'a> {
    inst: &'a Instance,
    dg: DependencyGraph,
    forced: Vec<BTreeSet<usize>>,
    chosen: BTreeSet<usize>,
}

impl<'a> Greedy<'a> {
    fn new(inst: &'a Instance) -> Self {
        let dg = DependencyGraph::derive(inst);
        let forced = (0..inst.len()).map(|q| dg.closure([q].iter())).collect();
        Greedy {
            inst,
            dg,
            forced,
            chosen: BTreeSet::new(),
        }
    }

    fn marginal(&self, q: usize) -> Marginal {
        let added: Vec<usize> = self.forced[q]
            .iter()
            .copied()
            .filter(|x| !self.chosen.contains(x))
            .collect();
        let (mut value, mut cost) = (0, 0);
        for &x in &added {
            value += self.inst.query(x).value_total().raw();
            cost += self.inst.query(x).cost_total().raw();
        }
        Marginal {
            added,
            profit: value - cost,
            value,
            cost,
        }
    }

    fn candidates(&self) -> impl Iterator<Item = (usize, Marginal)> + '_ {
        (0..self.inst.len())
            .filter(|q| !self.chosen.contains(q))
            .map(|q| (q, self.marginal(q)))
            .filter(|(_, m)| m.profit > 0)
    }

    fn finish(self, method: Method) -> Result<OptimalBidResult, SolveError> {
        OptimalBidResult::from_set(self.inst, &self.dg, self.chosen, method)
    }
}

/// Repeatedly adds the query with the largest positive marginal utility.
pub fn max_margin_greedy(inst: &Instance) -> Result<OptimalBidResult, SolveError> {
    let mut g = Greedy::new(inst);
    loop {
        // strict comparison keeps the lowest id among ties
        let best = g
            .candidates()
            .fold(None::<(usize, Marginal)>, |best, (q, m)| match best {
                Some((_, ref b)) if b.profit >= m.profit => best,
                _ => Some((q, m)),
            });
        match best {
            Some((_, m)) => g.chosen.extend(m.added),
            None => return g.finish(Method::GreedyMargin),
        }
    }
}

fn ratio(m: &Marginal, rate: Rate) -> f64 {
    let num = match rate {
        Rate::ProfitOverCost => m.profit,
        Rate::ValueOverCost => m.value,
    };
    if m.cost == 0 {
        f64::INFINITY
    } else {
        num as f64 / m.cost as f64
    }
}

/// Repeatedly adds the improving query with the best marginal ratio.
pub fn max_rate_greedy(inst: &Instance, rate: Rate) -> Result<OptimalBidResult, SolveError> {
    let mut g = Greedy::new(inst);
    loop {
        let best = g
            .candidates()
            .fold(None::<(f64, Marginal)>, |best, (_, m)| {
                let r = ratio(&m, rate);
                match best {
                    Some((b, _)) if b >= r => best,
                    _ => Some((r, m)),
                }
            });
        match best {
            Some((_, m)) => g.chosen.extend(m.added),
            None => return g.finish(Method::GreedyRate),
        }
    }
}
