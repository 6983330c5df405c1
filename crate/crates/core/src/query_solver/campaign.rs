//! Two budget-constrained campaigns that realize a budgeted LP optimum.
//!
//! The first campaign runs on the queries at 1 with exactly the budget it
//! needs. The second runs on the fractional queries with the remaining
//! budget; a campaign whose spend would exceed its budget participates in a
//! uniform fraction `budget / spend` of the auctions.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{BudgetedSolution, SolveError};
use crate::model::{Instance, Weight, WEIGHT_SCALE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Campaign {
    pub queries: BTreeSet<usize>,
    /// Budget in micro² units, like [`Weight`].
    pub budget: Weight,
}

impl Campaign {
    /// Full (unthrottled) spend of the campaign's queries.
    pub fn spend(&self, inst: &Instance) -> Weight {
        self.queries
            .iter()
            .map(|&q| inst.query(q).cost_total())
            .sum()
    }

    pub fn value(&self, inst: &Instance) -> Weight {
        self.queries
            .iter()
            .map(|&q| inst.query(q).value_total())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignPlan {
    pub campaign1: Campaign,
    pub campaign2: Campaign,
    /// Expected value of both campaigns, in currency units.
    pub predicted_value: f64,
}

/// Expected value of a campaign under uniform throttling.
pub fn simulate_campaign(inst: &Instance, campaign: &Campaign) -> f64 {
    let spend = campaign.spend(inst).raw();
    let value = campaign.value(inst).to_f64();
    let budget = campaign.budget.raw().max(0);
    if spend <= budget {
        value
    } else {
        value * (budget as f64 / spend as f64)
    }
}

/// Splits a budgeted LP solution into an integral and a throttled campaign.
pub fn plan_two_campaigns(
    inst: &Instance,
    sol: &BudgetedSolution,
) -> Result<CampaignPlan, SolveError> {
    let ones = sol.integral_ones.clone();
    let b1: Weight = ones.iter().map(|&q| inst.query(q).cost_total()).sum();
    let remaining = sol.budget - b1;
    // LP feasibility is checked in floating point; tolerate that much overrun.
    let slack = 1e-6 * sol.budget.raw().max(WEIGHT_SCALE) as f64;
    if (-remaining.raw()) as f64 > slack {
        return Err(SolveError::InconsistentPlan {
            spend: b1,
            budget: sol.budget,
        });
    }
    let remaining = Weight(remaining.raw().max(0));
    let campaign1 = Campaign {
        queries: ones,
        budget: b1,
    };
    let campaign2 = Campaign {
        queries: sol.fractional(),
        budget: remaining,
    };
    let rest_spend = campaign2.spend(inst).raw();
    let rest_value = campaign2.value(inst).to_f64();
    let fraction = if campaign2.queries.is_empty() {
        0.0
    } else if rest_spend == 0 {
        1.0
    } else {
        (remaining.raw() as f64 / rest_spend as f64).min(1.0)
    };
    let predicted_value = campaign1.value(inst).to_f64() + fraction * rest_value;
    Ok(CampaignPlan {
        campaign1,
        campaign2,
        predicted_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub queries: Vec<String>,
    pub budget: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignPlanReport {
    pub campaign1: CampaignReport,
    pub campaign2: CampaignReport,
    pub predicted_value: f64,
    pub realized_value: f64,
    pub lp_value: f64,
    pub shared_fraction: Option<f64>,
}

impl CampaignPlan {
    pub fn report(&self, inst: &Instance, sol: &BudgetedSolution) -> CampaignPlanReport {
        let campaign = |c: &Campaign| CampaignReport {
            queries: inst.ids(&c.queries),
            budget: c.budget.to_string(),
        };
        CampaignPlanReport {
            campaign1: campaign(&self.campaign1),
            campaign2: campaign(&self.campaign2),
            predicted_value: self.predicted_value,
            realized_value: self.realized_value(inst),
            lp_value: sol.lp_value,
            shared_fraction: sol.shared_fraction,
        }
    }

    pub fn realized_value(&self, inst: &Instance) -> f64 {
        simulate_campaign(inst, &self.campaign1) + simulate_campaign(inst, &self.campaign2)
    }
}
