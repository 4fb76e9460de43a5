// SPDX-License-Identifier: Apache-2.0
//! Confounding equivalence of covariate sets in causal diagrams.
//!
//! Two covariate sets `T` and `Z` are c-equivalent relative to a treatment
//! `X` and outcome `Y` when adjusting for either yields the same estimand
//! `A(x, y, S) = Σ_s P(y | x, s) P(s)` under every distribution compatible
//! with the diagram. This crate decides c-equivalence graphically and
//! checks each verdict against exact enumeration over discrete models.
//!
//! - [`graph`]: DAGs, variable sets, parsing, ancestral and moral graphs.
//! - [`separation`]: d-separation with three independent backends.
//! - [`boundary`]: Markov boundaries of a treatment within a set.
//! - [`admissibility`]: the back-door criterion.
//! - [`equivalence`]: the c-equivalence tests and step-wise chains.
//! - [`oracle`]: exact discrete models, estimands and causal effects.
//! - [`falsify`]: testing candidate diagrams against a distribution.
//! - [`cli`]: the `cequiv` command-line front end.

pub mod admissibility;
pub mod boundary;
pub mod cli;
pub mod equivalence;
pub mod error;
pub mod falsify;
pub mod fixtures;
pub mod graph;
pub mod oracle;
pub mod separation;

pub use error::{Error, Result};
pub use graph::{parse_graph, Dag, NodeId, UGraph, VarSet};
