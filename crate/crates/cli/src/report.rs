//! Report documents written by `solve`, `experiment` and `plan`.

use std::time::Duration;

use broadbid::model::{BidVector, Instance};
use broadbid::DependencyGraph;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct InstanceSummary {
    pub queries: usize,
    pub biddable: usize,
    pub dependency_pairs: usize,
}

impl InstanceSummary {
    pub fn of(inst: &Instance) -> Self {
        InstanceSummary {
            queries: inst.len(),
            biddable: inst.biddable().count(),
            dependency_pairs: DependencyGraph::derive(inst).proper_pairs().count(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodRow {
    pub method: String,
    pub utility: f64,
    pub value_part: f64,
    pub cost_part: f64,
    pub spend: f64,
    pub wall_time_ms: f64,
}

impl MethodRow {
    pub fn new(
        method: &str,
        utility: f64,
        value: f64,
        cost: f64,
        spend: f64,
        took: Duration,
    ) -> Self {
        MethodRow {
            method: method.to_string(),
            utility,
            value_part: value,
            cost_part: cost,
            spend,
            wall_time_ms: took.as_secs_f64() * 1e3,
        }
    }
}

/// One line of the per-query table; also the CSV record layout.
#[derive(Debug, Clone, Serialize)]
pub struct QueryRow {
    pub id: String,
    pub value: String,
    pub cost: String,
    pub clicks: String,
    pub w: String,
    pub bid_exact: String,
    pub bid_broad: String,
    /// "1"/"0", or the LP fraction for budgeted solves.
    pub won: String,
}

pub fn query_rows(
    inst: &Instance,
    bid: &BidVector,
    won: impl Fn(usize) -> String,
) -> Vec<QueryRow> {
    let show = |m: Option<broadbid::Money>| m.map(|m| m.to_string()).unwrap_or_default();
    inst.queries()
        .iter()
        .enumerate()
        .map(|(i, q)| QueryRow {
            id: q.id.clone(),
            value: q.value.to_string(),
            cost: q.cost.to_string(),
            clicks: q.clicks.to_string(),
            w: q.weight().to_string(),
            bid_exact: show(bid.get(i).exact),
            bid_broad: show(bid.get(i).broad),
            won: won(i),
        })
        .collect()
}

pub fn won_flag(member: bool) -> String {
    if member { "1" } else { "0" }.to_string()
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub solver: &'static str,
    pub instance_format: u32,
    pub report_format: u32,
}

pub const VERSIONS: Versions = Versions {
    solver: env!("CARGO_PKG_VERSION"),
    instance_format: broadbid::INSTANCE_FORMAT_VERSION,
    report_format: broadbid::REPORT_FORMAT_VERSION,
};

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub versions: Versions,
    pub instance: InstanceSummary,
    pub rows: Vec<MethodRow>,
    /// Method-specific details (budgeted solution, rounding summary, ...).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
    pub queries: Vec<QueryRow>,
}

pub fn to_csv<T: Serialize>(records: &[T]) -> anyhow::Result<String> {
    let mut out = csv::Writer::from_writer(Vec::new());
    for r in records {
        out.serialize(r)?;
    }
    Ok(String::from_utf8(out.into_inner()?)?)
}
