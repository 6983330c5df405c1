//! Instances, bids, winning sets and the dependency relation between queries.

mod bids;
mod dependency;
mod instance;
mod units;

use thiserror::Error;

pub use bids::{
    bid_from_winning_set, interpret_bid, interpreted_broad_bid, utility, Bid, BidVector, Language,
    Utility, WinningSet,
};
pub use dependency::DependencyGraph;
pub use instance::{Instance, InstanceDocument, Query};
pub use units::{AmountError, Clicks, Money, Weight, MICROS, WEIGHT_SCALE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("cannot parse instance: {0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
    #[error("duplicate query id `{0}`")]
    DuplicateId(String),
    #[error("unknown query id `{0}`")]
    UnknownId(String),
    #[error("query `{0}` has a negative cost")]
    NegativeCost(String),
    #[error("budget {0} is negative")]
    NegativeBudget(Money),
    #[error("query `{0}` is not biddable")]
    NotBiddable(String),
    #[error("negative bid on `{0}`")]
    NegativeBid(String),
    #[error("exact-match bid on `{0}` in the query language")]
    ExactInQueryLanguage(String),
    #[error("bid vector has {got} entries, instance has {expected} queries")]
    BidLength { expected: usize, got: usize },
    #[error("query set is not closed under the dependency pairs")]
    NotClosed,
    #[error(transparent)]
    Amount(#[from] AmountError),
}
