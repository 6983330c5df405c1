//! Bidding with exact and broad match on a fixed set of phrases.
//!
//! [`relaxation`] builds and solves the LP over bid-level masses,
//! [`rounding`] turns a fractional solution into random bids with a
//! utility guarantee, and [`exact`] finds the true optimum on small
//! instances.

pub mod exact;
pub mod relaxation;
pub mod rounding;

use thiserror::Error;

use crate::model::ModelError;
use crate::simplex::{LpError, Status};

pub use exact::{solve_keyword_exact, ExactOptions, ExactSolution, Strategy};
pub use relaxation::{build_ilp_approx, solve_relaxation, Choice, KeywordFractional, KeywordLp};
pub use rounding::{
    round_bid, rounding_experiment, selection_probability, utility_bound, RoundingReport,
    RoundingSummary, TrialRow,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeywordError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("LP solver finished with status {0:?}")]
    LpStatus(Status),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("epsilon must lie in [0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("search exceeded {0} nodes")]
    NodeLimit(u64),
}
