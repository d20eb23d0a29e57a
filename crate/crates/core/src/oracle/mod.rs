//! Independent brute-force validators.
//!
//! Nothing here shares code paths with the solvers it checks beyond the
//! model constants: the belief drift is checked against an agent-based
//! Monte-Carlo cohort, the value equations against explicit Bellman backups
//! and the infected terminal penalty against simulated recover-or-die races.

mod bellman;
mod cohort;
mod profile;

pub use bellman::{bellman_reference, terminal_penalty_monte_carlo};
pub use cohort::{
    belief_path, compare_belief, simulate_agent, simulate_belief_cohort, uniform_sample_times, validate_belief,
    AgentPath, BeliefComparison, CohortSample, CohortSpec, ComparisonRow,
};
pub use profile::{random_profile_pair, random_profile_pairs, Profile};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid cohort setup: {0}")]
    InvalidCohort(String),
}
