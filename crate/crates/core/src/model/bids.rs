use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::dependency::DependencyGraph;
use super::instance::Instance;
use super::units::{Money, Weight};
use super::ModelError;

/// Which bids the advertiser may place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    /// Broad bids on any query; a query always matches itself.
    Query,
    /// Exact or broad bids on biddable phrases only.
    Keyword,
}

/// The bids placed on one phrase. `None` means no bid of that kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bid {
    pub exact: Option<Money>,
    pub broad: Option<Money>,
}

/// One [`Bid`] per query position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BidVector(Vec<Bid>);

impl BidVector {
    pub fn empty(n: usize) -> Self {
        BidVector(vec![Bid::default(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0
            .iter()
            .all(|b| b.exact.is_none() && b.broad.is_none())
    }

    pub fn get(&self, q: usize) -> Bid {
        self.0[q]
    }

    pub fn set_broad(&mut self, q: usize, amount: Money) {
        self.0[q].broad = Some(amount);
    }

    pub fn set_exact(&mut self, q: usize, amount: Money) {
        self.0[q].exact = Some(amount);
    }

    pub fn clear(&mut self, q: usize) {
        self.0[q] = Bid::default();
    }

    pub fn iter(&self) -> impl Iterator<Item = &Bid> {
        self.0.iter()
    }

    /// Checks the bids against the instance and the bidding language.
    pub fn validate(&self, inst: &Instance, language: Language) -> Result<(), ModelError> {
        if self.0.len() != inst.len() {
            return Err(ModelError::BidLength {
                expected: inst.len(),
                got: self.0.len(),
            });
        }
        for (q, bid) in self.0.iter().enumerate() {
            let id = || inst.query(q).id.clone();
            let amounts = bid.exact.iter().chain(bid.broad.iter());
            if amounts.into_iter().any(|m| *m < Money::ZERO) {
                return Err(ModelError::NegativeBid(id()));
            }
            match language {
                Language::Query if bid.exact.is_some() => {
                    return Err(ModelError::ExactInQueryLanguage(id()))
                }
                Language::Keyword
                    if (bid.exact.is_some() || bid.broad.is_some()) && !inst.query(q).biddable =>
                {
                    return Err(ModelError::NotBiddable(id()))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Utility of a query set split into its value and cost parts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utility {
    pub utility: Weight,
    pub value_part: Weight,
    pub cost_part: Weight,
}

/// Exact utility of `members`.
pub fn utility<'a>(inst: &Instance, members: impl IntoIterator<Item = &'a usize>) -> Utility {
    let mut value_part = Weight::ZERO;
    let mut cost_part = Weight::ZERO;
    for &q in members {
        let query = inst.query(q);
        value_part += query.value_total();
        cost_part += query.cost_total();
    }
    Utility {
        utility: value_part - cost_part,
        value_part,
        cost_part,
    }
}

/// A set of won queries with its utility decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinningSet {
    pub members: BTreeSet<usize>,
    pub utility: Weight,
    pub value_part: Weight,
    pub cost_part: Weight,
}

impl WinningSet {
    pub fn evaluate(inst: &Instance, members: BTreeSet<usize>) -> Self {
        let u = utility(inst, &members);
        WinningSet {
            members,
            utility: u.utility,
            value_part: u.value_part,
            cost_part: u.cost_part,
        }
    }

    pub fn contains(&self, q: usize) -> bool {
        self.members.contains(&q)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Interpreted broad bid at `q`: the max over every placed broad bid that
/// matches `q`. A query-language bid on `q` always matches `q`.
pub fn interpreted_broad_bid(inst: &Instance, bid: &BidVector, q: usize) -> Option<Money> {
    let own = bid.get(q).broad;
    inst.matchers(q)
        .iter()
        .filter_map(|&s| bid.get(s).broad)
        .chain(own)
        .max()
}

/// The queries won by `bid` under max aggregation.
///
/// `q` is won when a placed exact bid on `q`, or the interpreted broad bid,
/// reaches `cost(q)`. Placed bids of zero count and win zero-cost queries.
pub fn interpret_bid(inst: &Instance, bid: &BidVector) -> WinningSet {
    let members = (0..inst.len())
        .filter(|&q| {
            let cost = inst.query(q).cost;
            let exact = bid.get(q).exact.is_some_and(|b| b >= cost);
            exact || interpreted_broad_bid(inst, bid, q).is_some_and(|b| b >= cost)
        })
        .collect();
    WinningSet::evaluate(inst, members)
}

/// The bid that realizes a feasible winning set: a broad bid of `cost(q)`
/// on every member with positive weight, nothing elsewhere.
///
/// The interpreted set is a subset of `members` containing every
/// positive-weight member, so its utility is at least that of `members`.
pub fn bid_from_winning_set(
    inst: &Instance,
    dg: &DependencyGraph,
    members: &BTreeSet<usize>,
    language: Language,
) -> Result<BidVector, ModelError> {
    if let Some(&q) = members.iter().find(|&&q| q >= inst.len()) {
        return Err(ModelError::UnknownId(format!("#{q}")));
    }
    if !dg.is_closed(members) {
        return Err(ModelError::NotClosed);
    }
    let mut bid = BidVector::empty(inst.len());
    for &q in members {
        let query = inst.query(q);
        if !query.weight().is_positive() {
            continue;
        }
        if language == Language::Keyword && !query.biddable {
            return Err(ModelError::NotBiddable(query.id.clone()));
        }
        bid.set_broad(q, query.cost);
    }
    Ok(bid)
}
