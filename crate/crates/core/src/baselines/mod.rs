//! Greedy heuristics, exhaustive oracles and instance generators.

pub mod generate;
pub mod greedy;
pub mod oracle;

pub use generate::{generate, GenerateError, GeneratorSpec};
pub use greedy::{max_margin_greedy, max_rate_greedy, Rate};
pub use oracle::{
    brute_force_budgeted_integral, brute_force_keyword_budgeted, brute_force_query,
    BudgetedIntegral, OracleError,
};
