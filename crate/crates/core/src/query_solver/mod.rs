//! Optimal bidding when every query may carry a broad bid.
//!
//! An optimal bid is a maximum-weight set closed under the dependency
//! pairs. [`solve_query_mincut`] finds it as the sink side of a minimum
//! cut; [`solve_query_lp`] solves the LP relaxation of the closure
//! program, whose constraint matrix is totally unimodular, and reads the
//! set off an integral vertex. The budgeted variant lives in [`budgeted`]
//! and [`campaign`].

pub mod budgeted;
pub mod campaign;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::maxflow::{self, FlowError};
use crate::model::{
    bid_from_winning_set, interpret_bid, BidVector, DependencyGraph, Instance, Language,
    ModelError, Weight, WinningSet,
};
use crate::simplex::{self, LinearProgram, LpError, Relation, Status, TOL_INTEGRAL};

pub use budgeted::{
    solve_budgeted_lagrangian, solve_budgeted_lp, BudgetedSolution, LagrangianEstimate,
};
pub use campaign::{
    plan_two_campaigns, simulate_campaign, Campaign, CampaignPlan, CampaignPlanReport,
    CampaignReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("LP solver finished with status {0:?}")]
    LpStatus(Status),
    #[error("LP vertex is not integral (max deviation {0:e})")]
    NonIntegral(f64),
    #[error("cut identity violated: positive total {positive} - cut {cut} != utility {utility}")]
    CutIdentity {
        positive: i128,
        cut: i128,
        utility: i128,
    },
    #[error("budgeted LP vertex has more than one fractional value: {0:?}")]
    StructureViolation(Vec<f64>),
    #[error("instance has no budget")]
    MissingBudget,
    #[error("integral campaign spends {spend} above the budget {budget}")]
    InconsistentPlan { spend: Weight, budget: Weight },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mincut,
    Lp,
    KeywordExact,
    KeywordLpRound,
    GreedyMargin,
    GreedyRate,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mincut => "mincut",
            Method::Lp => "lp",
            Method::KeywordExact => "keyword-exact",
            Method::KeywordLpRound => "keyword-lp-round",
            Method::GreedyMargin => "greedy-margin",
            Method::GreedyRate => "greedy-rate",
            Method::Oracle => "oracle",
        }
    }
}

/// A winning set, the bid that realizes it, and its utility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalBidResult {
    pub winning_set: WinningSet,
    pub bid: BidVector,
    pub method: Method,
    pub objective: Weight,
}

impl OptimalBidResult {
    pub(crate) fn from_set(
        inst: &Instance,
        dg: &DependencyGraph,
        members: BTreeSet<usize>,
        method: Method,
    ) -> Result<Self, SolveError> {
        // The reported set is what the bid actually wins. It equals `members`
        // up to dropped non-positive queries when broad match is transitive;
        // otherwise it may be a strictly better set that is not closed.
        let bid = bid_from_winning_set(inst, dg, &members, Language::Query)?;
        let winning_set = interpret_bid(inst, &bid);
        Ok(OptimalBidResult {
            objective: winning_set.utility,
            winning_set,
            bid,
            method,
        })
    }
}

/// Maximum-weight closed set under `dg` for arbitrary integer weights,
/// with the cut value that certifies it.
pub fn max_weight_closure(
    dg: &DependencyGraph,
    weights: &[Weight],
) -> Result<(BTreeSet<usize>, i128), SolveError> {
    let net = maxflow::build_flow_graph(dg, weights)?;
    let cut = maxflow::max_flow(&net)?;
    let members: BTreeSet<usize> = cut
        .sink_side
        .iter()
        .filter(|&&v| v != maxflow::SINK && v != maxflow::SOURCE)
        .map(|&v| v - 2)
        .collect();
    let positive: i128 = weights
        .iter()
        .filter(|w| w.is_positive())
        .map(|w| w.raw())
        .sum();
    let utility: i128 = members.iter().map(|&q| weights[q].raw()).sum();
    if positive - cut.flow_value != utility {
        return Err(SolveError::CutIdentity {
            positive,
            cut: cut.flow_value,
            utility,
        });
    }
    debug_assert!(dg.is_closed(&members));
    Ok((members, cut.flow_value))
}

/// Optimal winning set from a minimum cut of the closure network.
pub fn solve_query_mincut(inst: &Instance) -> Result<OptimalBidResult, SolveError> {
    let dg = DependencyGraph::derive(inst);
    let (members, _) = max_weight_closure(&dg, &inst.weights())?;
    OptimalBidResult::from_set(inst, &dg, members, Method::Mincut)
}

/// The closure program `max Σ X_q w(q)` s.t. `X_q - X_p >= 0` for each
/// pair `(p, q)`, over `[0, 1]`, with weights scaled to unit magnitude.
pub fn closure_lp(dg: &DependencyGraph, weights: &[Weight]) -> LinearProgram {
    let scale = weights
        .iter()
        .map(|w| w.raw().unsigned_abs())
        .max()
        .filter(|&m| m > 0)
        .unwrap_or(1) as f64;
    let mut lp = LinearProgram::new(weights.len());
    for (q, w) in weights.iter().enumerate() {
        lp.set_objective(q, w.raw() as f64 / scale);
    }
    for (p, q) in dg.proper_pairs() {
        lp.add_row(vec![(q, 1.0), (p, -1.0)], Relation::Ge, 0.0);
    }
    lp
}

/// Optimal winning set from an integral vertex of the closure LP.
pub fn solve_query_lp(inst: &Instance) -> Result<OptimalBidResult, SolveError> {
    let dg = DependencyGraph::derive(inst);
    let (members, _) = closure_by_lp(&dg, &inst.weights())?;
    OptimalBidResult::from_set(inst, &dg, members, Method::Lp)
}

/// Returns the set and the largest distance of any `X_q` from {0, 1}.
pub fn closure_by_lp(
    dg: &DependencyGraph,
    weights: &[Weight],
) -> Result<(BTreeSet<usize>, f64), SolveError> {
    let lp = closure_lp(dg, weights);
    let sol = simplex::solve(&lp)?;
    if sol.status != Status::Optimal {
        return Err(SolveError::LpStatus(sol.status));
    }
    let deviation = sol.max_fractionality();
    if deviation > TOL_INTEGRAL {
        return Err(SolveError::NonIntegral(deviation));
    }
    let members: BTreeSet<usize> = (0..weights.len())
        .filter(|&q| sol.values[q] >= 0.5)
        .collect();
    Ok((members, deviation))
}
