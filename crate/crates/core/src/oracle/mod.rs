// SPDX-License-Identifier: Apache-2.0
//! Exact probabilistic ground truth for the graphical tests.
//!
//! Models are small discrete Bayesian networks evaluated by full
//! enumeration, so every estimand here is computed without sampling.

mod distribution;
mod model;
mod text;

pub use distribution::{Distribution, EstimandTable, PropensityTable, MAX_STATES, PROPENSITY_MERGE_TOL};
pub use model::{
    attempt_seed, conditionally_independent, empirically_c_equivalent, estimand_gap, random_binary_model,
    random_model, search_violation, DiscreteModel, Violation, ViolationSummary, ROW_SUM_TOL,
    VIOLATION_THRESHOLD,
};
pub use text::{parse_model, parse_table, write_model, write_table};

/// Agreement tolerance when confirming a graphical equivalence numerically.
pub const CONFIRM_TOL: f64 = 1e-10;
