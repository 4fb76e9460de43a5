// SPDX-License-Identifier: Apache-2.0
use thiserror::Error;

use crate::graph::{NodeId, VarSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid node name {0:?}: names are nonempty runs of [A-Za-z0-9_]")]
    InvalidNodeName(String),
    #[error("graph contains a directed cycle: {}", join(.0))]
    Cycle(Vec<NodeId>),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("self-loop on {0}")]
    SelfLoop(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("graph has {0} nodes; at most 64 are supported")]
    TooManyNodes(usize),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("invalid trail: {0}")]
    InvalidTrail(String),
    #[error("the paths backend is limited to {limit} nodes, graph has {nodes}")]
    BackendLimit { nodes: usize, limit: usize },
    #[error("{set} contains descendants of {treatment}: {nodes}")]
    DescendantOfTreatment {
        set: &'static str,
        treatment: NodeId,
        nodes: VarSet,
    },
    #[error("set of {0} elements exceeds the partition search cap of 20")]
    PartitionTooLarge(usize),
    #[error("equivalence chain search exhausted: {0}")]
    SearchExhausted(String),
    #[error("joint state space of {0} states exceeds the cap of 2^24")]
    StateSpaceTooLarge(u128),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("P(y | x, z) undefined: P(z) > 0 but P(x, z) = 0 for x = {x_state}")]
    UndefinedConditional { x_state: usize },
    #[error("{0} must be binary for propensity scores")]
    NonBinaryTreatment(NodeId),
}

fn join(nodes: &[NodeId]) -> String {
    nodes
        .iter()
        .map(|n| n.as_str())
        .collect::<Vec<_>>()
        .join(" -> ")
}

pub type Result<T> = std::result::Result<T, Error>;
