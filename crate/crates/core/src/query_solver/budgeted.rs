//! Value maximization under a spend budget.
//!
//! The LP `max Σ X_q v(q) n(q)` subject to the closure rows and
//! `Σ X_q c(q) n(q) <= B` has optimal vertices where every `X_q` is 0, 1 or
//! one shared fraction `X`. [`solve_budgeted_lp`] recovers that structure
//! and fails when it is absent. [`solve_budgeted_lagrangian`] evaluates the
//! same optimum from the other side, as the concave envelope of the
//! (spend, value) points of closed sets, using only min-cuts.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{closure_lp, max_weight_closure, SolveError};
use crate::model::{DependencyGraph, Instance, Money, Weight};
use crate::simplex::{self, Relation, Status};

/// Absolute tolerance for grouping LP values into {0, 1, X}.
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetedSolution {
    pub x: Vec<f64>,
    pub integral_ones: BTreeSet<usize>,
    pub integral_zeros: BTreeSet<usize>,
    pub shared_fraction: Option<f64>,
    /// `Σ X_q v(q) n(q)` in currency units.
    pub lp_value: f64,
    /// `Σ X_q c(q) n(q)` in currency units.
    pub spend: f64,
    pub budget: Weight,
}

impl BudgetedSolution {
    /// Queries holding the shared fraction.
    pub fn fractional(&self) -> BTreeSet<usize> {
        (0..self.x.len())
            .filter(|q| !self.integral_ones.contains(q) && !self.integral_zeros.contains(q))
            .collect()
    }
}

fn budget_of(inst: &Instance, budget: Option<Money>) -> Result<Money, SolveError> {
    budget.or(inst.budget()).ok_or(SolveError::MissingBudget)
}

fn totals(inst: &Instance) -> (Vec<i128>, Vec<i128>) {
    inst.queries()
        .iter()
        .map(|q| (q.value_total().raw(), q.cost_total().raw()))
        .unzip()
}

fn max_abs(xs: &[i128]) -> f64 {
    xs.iter()
        .map(|x| x.unsigned_abs())
        .max()
        .filter(|&m| m > 0)
        .unwrap_or(1) as f64
}

/// Solves the budgeted LP; `budget` overrides the instance budget.
pub fn solve_budgeted_lp(
    inst: &Instance,
    budget: Option<Money>,
) -> Result<BudgetedSolution, SolveError> {
    let budget = budget_of(inst, budget)?;
    if budget < Money::ZERO {
        return Err(crate::model::ModelError::NegativeBudget(budget).into());
    }
    let dg = DependencyGraph::derive(inst);
    let (values, costs) = totals(inst);
    let vscale = max_abs(&values);
    let cscale = max_abs(&costs);
    let b = budget.to_weight();

    let mut lp = closure_lp(&dg, &vec![Weight::ZERO; inst.len()]);
    for (q, &v) in values.iter().enumerate() {
        lp.set_objective(q, v as f64 / vscale);
    }
    let row: Vec<(usize, f64)> = costs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(q, &c)| (q, c as f64 / cscale))
        .collect();
    lp.add_row(row, Relation::Le, b.raw() as f64 / cscale);

    let sol = simplex::solve(&lp)?;
    if sol.status != Status::Optimal {
        return Err(SolveError::LpStatus(sol.status));
    }

    let mut ones = BTreeSet::new();
    let mut zeros = BTreeSet::new();
    let mut fractional = Vec::new();
    for (q, &x) in sol.values.iter().enumerate() {
        if x <= CLUSTER_TOL {
            zeros.insert(q);
        } else if x >= 1.0 - CLUSTER_TOL {
            ones.insert(q);
        } else {
            fractional.push(q);
        }
    }
    let mut x: Vec<f64> = (0..inst.len())
        .map(|q| if ones.contains(&q) { 1.0 } else { 0.0 })
        .collect();
    let mut shared_fraction = None;
    if !fractional.is_empty() {
        let raw: Vec<f64> = fractional.iter().map(|&q| sol.values[q]).collect();
        let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > CLUSTER_TOL {
            return Err(SolveError::StructureViolation(raw));
        }
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        // Fix X exactly from the tight budget row when it involves the cluster.
        let b1: i128 = ones.iter().map(|&q| costs[q]).sum();
        let b_frac: i128 = fractional.iter().map(|&q| costs[q]).sum();
        let mut value = mean;
        if b_frac > 0 {
            let exact = (b.raw() - b1) as f64 / b_frac as f64;
            if (exact - mean).abs() <= CLUSTER_TOL {
                value = exact;
            }
        }
        for &q in &fractional {
            x[q] = value;
        }
        shared_fraction = Some(value);
    }

    let lp_value = x
        .iter()
        .zip(&values)
        .map(|(x, &v)| x * v as f64)
        .sum::<f64>()
        / crate::model::WEIGHT_SCALE as f64;
    let spend = x
        .iter()
        .zip(&costs)
        .map(|(x, &c)| x * c as f64)
        .sum::<f64>()
        / crate::model::WEIGHT_SCALE as f64;
    Ok(BudgetedSolution {
        x,
        integral_ones: ones,
        integral_zeros: zeros,
        shared_fraction,
        lp_value,
        spend,
        budget: b,
    })
}

/// Result of the parametric min-cut search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagrangianEstimate {
    /// Envelope value at the budget, in currency units.
    pub value: f64,
    /// Slope of the envelope segment containing the budget.
    pub multiplier: f64,
    /// Closed set at or below the budget on that segment.
    pub lower_set: BTreeSet<usize>,
    /// Closed set above the budget, when the budget binds.
    pub upper_set: Option<BTreeSet<usize>>,
    pub cuts: usize,
}

#[derive(Debug, Clone)]
struct Point {
    set: BTreeSet<usize>,
    cost: i128,
    value: i128,
}

impl Point {
    fn new(set: BTreeSet<usize>, values: &[i128], costs: &[i128]) -> Self {
        let cost = set.iter().map(|&q| costs[q]).sum();
        let value = set.iter().map(|&q| values[q]).sum();
        Point { set, cost, value }
    }
}

/// Largest integer weight magnitude handed to the min-cut.
const LAMBDA_WEIGHT_RANGE: f64 = (1u64 << 60) as f64;

fn cut_at(
    dg: &DependencyGraph,
    values: &[i128],
    costs: &[i128],
    lambda: f64,
) -> Result<BTreeSet<usize>, SolveError> {
    let terms: Vec<f64> = values
        .iter()
        .zip(costs)
        .map(|(&v, &c)| v as f64 - lambda * c as f64)
        .collect();
    let top = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let scale = if top > 0.0 {
        LAMBDA_WEIGHT_RANGE / top
    } else {
        1.0
    };
    let weights: Vec<Weight> = terms
        .iter()
        .map(|t| Weight((t * scale).round() as i128))
        .collect();
    Ok(max_weight_closure(dg, &weights)?.0)
}

/// Value of the concave envelope of closed-set (spend, value) points at
/// the budget, found by walking the hull with min-cuts.
pub fn solve_budgeted_lagrangian(
    inst: &Instance,
    budget: Option<Money>,
) -> Result<LagrangianEstimate, SolveError> {
    let budget = budget_of(inst, budget)?;
    if budget < Money::ZERO {
        return Err(crate::model::ModelError::NegativeBudget(budget).into());
    }
    let b = budget.to_weight().raw();
    let dg = DependencyGraph::derive(inst);
    let (values, costs) = totals(inst);
    let to_units = |x: i128| x as f64 / crate::model::WEIGHT_SCALE as f64;

    // Unconstrained value maximum.
    let top = Point::new(
        max_weight_closure(&dg, &values.iter().map(|&v| Weight(v)).collect::<Vec<_>>())?.0,
        &values,
        &costs,
    );
    let mut cuts = 1;
    if top.cost <= b {
        return Ok(LagrangianEstimate {
            value: to_units(top.value),
            multiplier: 0.0,
            lower_set: top.set,
            upper_set: None,
            cuts,
        });
    }
    // Best value among closed sets of zero spend.
    let forbid = -(values.iter().filter(|&&v| v > 0).sum::<i128>() + 1);
    let free: Vec<Weight> = values
        .iter()
        .zip(&costs)
        .map(|(&v, &c)| Weight(if c > 0 { forbid } else { v }))
        .collect();
    let mut lo = Point::new(max_weight_closure(&dg, &free)?.0, &values, &costs);
    cuts += 1;
    let mut hi = top;

    loop {
        let lambda = (hi.value - lo.value) as f64 / (hi.cost - lo.cost) as f64;
        let set = cut_at(&dg, &values, &costs, lambda)?;
        cuts += 1;
        let p = Point::new(set, &values, &costs);
        let gain = |pt: &Point| pt.value as f64 - lambda * pt.cost as f64;
        let slack = 1e-12 * (hi.value.unsigned_abs() + lo.value.unsigned_abs()) as f64;
        let improves = gain(&p) > gain(&lo) + slack
            && (p.cost, p.value) != (lo.cost, lo.value)
            && (p.cost, p.value) != (hi.cost, hi.value);
        if !improves || cuts > 10_000 {
            let t = (b - lo.cost) as f64 / (hi.cost - lo.cost) as f64;
            let value = to_units(lo.value) + t * to_units(hi.value - lo.value);
            return Ok(LagrangianEstimate {
                value,
                multiplier: lambda,
                lower_set: lo.set,
                upper_set: Some(hi.set),
                cuts,
            });
        }
        if p.cost > b {
            hi = p;
        } else {
            lo = p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Clicks, Query};

    fn q(id: &str, v: &str, c: &str) -> Query {
        Query {
            id: id.into(),
            value: v.parse().unwrap(),
            cost: c.parse().unwrap(),
            clicks: Clicks::ONE,
            biddable: true,
        }
    }

    fn pair() -> Instance {
        Instance::new(
            vec![q("a", "3", "2"), q("ab", "1", "1"), q("b", "2", "2")],
            vec![("a", "ab")],
            None,
        )
        .unwrap()
    }

    #[test]
    fn slack_budget_is_integral() {
        let i = pair();
        let s = solve_budgeted_lp(&i, Some(Money::from_units(10))).unwrap();
        assert_eq!(s.shared_fraction, None);
        assert_eq!(s.integral_ones.len(), 3);
        assert!((s.lp_value - 6.0).abs() < 1e-9);
        let l = solve_budgeted_lagrangian(&i, Some(Money::from_units(10))).unwrap();
        assert!((l.value - 6.0).abs() < 1e-9);
        assert_eq!(l.multiplier, 0.0);
    }

    #[test]
    fn zero_budget() {
        let i = pair();
        let s = solve_budgeted_lp(&i, Some(Money::ZERO)).unwrap();
        assert!(s.x.iter().all(|&x| x == 0.0));
        assert_eq!(s.lp_value, 0.0);
        let l = solve_budgeted_lagrangian(&i, Some(Money::ZERO)).unwrap();
        assert_eq!(l.value, 0.0);
    }

    #[test]
    fn binding_budget_matches_envelope() {
        // points: {ab} (1,1), {b} (2,2), {ab,b} (3,3), {a,ab} (3,4), all (5,6);
        // the upper hull runs (0,0) -> (3,4) -> (5,6)
        let i = pair();
        for (budget, expect) in [(1.0, 4.0 / 3.0), (2.0, 8.0 / 3.0), (3.0, 4.0), (4.0, 5.0)] {
            let s = solve_budgeted_lp(&i, Some(Money::from_f64(budget))).unwrap();
            let l = solve_budgeted_lagrangian(&i, Some(Money::from_f64(budget))).unwrap();
            assert!(
                (s.lp_value - expect).abs() < 1e-7,
                "{budget}: {}",
                s.lp_value
            );
            assert!((l.value - expect).abs() < 1e-7, "{budget}: {}", l.value);
            assert!(s.spend <= budget + 1e-9);
        }
    }

    #[test]
    fn missing_budget() {
        assert_eq!(
            solve_budgeted_lp(&pair(), None).unwrap_err(),
            SolveError::MissingBudget
        );
    }
}
