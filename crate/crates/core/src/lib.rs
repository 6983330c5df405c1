//! Profit-maximizing bids for sponsored-search auctions with broad match.
//!
//! Winning a query `q'` whose broad match covers a cheaper query `q` forces
//! winning `q` too, so the best bid is a maximum-weight closed set of the
//! resulting dependency relation. This crate provides:
//!
//! * [`query_solver`]: exact optimization when any query may carry a broad
//!   bid (min-cut and LP), the budgeted LP with its two-campaign
//!   implementation, and a Lagrangian cross-check.
//! * [`keyword_solver`]: the keyword language with exact and broad match: an
//!   LP relaxation, randomized rounding with a utility guarantee, and exact
//!   enumeration / branch-and-bound for small instances.
//! * [`baselines`]: greedy heuristics, brute-force oracles and generators for
//!   the adversarial and reduction instance families.
//! * [`maxflow`] and [`simplex`]: the exact min-cut and vertex LP engines.

pub mod baselines;
pub mod experiment;
pub mod keyword_solver;
pub mod maxflow;
pub mod model;
pub mod query_solver;
pub mod rng;
pub mod simplex;

pub use model::{
    BidVector, Clicks, DependencyGraph, Instance, Language, ModelError, Money, Query, Weight,
    WinningSet,
};

/// Version of the instance document layout read and written by [`Instance`].
pub const INSTANCE_FORMAT_VERSION: u32 = 1;
/// Version of the JSON/CSV report layout.
pub const REPORT_FORMAT_VERSION: u32 = 1;
