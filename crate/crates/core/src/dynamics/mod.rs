//! Finite-horizon checkers for the weight conditions that characterize
//! disjoint transitivity, disjoint mixing and chaos of weighted translations,
//! together with the constructive witness `v = fχ_E + Σ_l S_l^{r_l n}(g_l χ_E)`
//! and truncated periodic points.
//!
//! A checker either verifies its conditions at some `n ≤ n_max`, reports that
//! it could not, or refuses when a pre-check rules the dynamics out. Failing to
//! verify is never a disproof.

mod checks;
mod periodic;
mod report;
mod scenario;
mod witness;

#[cfg(test)]
mod tests;

use thiserror::Error;

use crate::group::GroupError;
use crate::orlicz::OrliczError;
use crate::translation::TranslationError;

pub use checks::{
    chaos_sum, check_chaotic, check_disjoint_chaotic, check_disjoint_mixing, check_disjoint_transitive,
    check_same_weight, ChaosSum, TAIL_RATIO_MAX,
};
pub use periodic::{build_periodic_point, PeriodicPoint};
pub use report::{ConditionReport, Mode, Refusal, TraceRow, Verdict};
pub use scenario::{Scenario, MIN_CHAOS_TERMS};
pub use witness::{build_witness, verify_witness, WitnessResiduals};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("this mode needs at least {needed} operators, got {got}")]
    TooFewOperators { needed: usize, got: usize },
    #[error("{what} is not contained in K")]
    SupportEscapesK { what: String },
    #[error("expected {expected} targets (or none), got {got}")]
    TargetCount { expected: usize, got: usize },
    #[error("E meets E a^(k n) for k = {k}")]
    DisjointnessViolated { k: usize },
    #[error("not chaotic at n = {n}: chaos sum {sum} is not certified below epsilon")]
    NotChaoticAtN { n: usize, sum: f64 },
    #[error(transparent)]
    Translation(#[from] TranslationError),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
    #[error(transparent)]
    Group(#[from] GroupError),
}
