// SPDX-License-Identifier: Apache-2.0
//! The three reference diagrams shipped with the crate.

use crate::graph::{parse_graph, Dag};

pub const SIDE_PARENTS: &str = include_str!("../fixtures/side_parents.dag");
pub const INSTRUMENTS: &str = include_str!("../fixtures/instruments.dag");
pub const COLLIDER: &str = include_str!("../fixtures/collider.dag");

/// `W1→X, V1→X, V1→V2, V2→Y, W2→Y, X→Y`.
pub fn side_parents() -> Dag {
    parse_graph(SIDE_PARENTS).expect("side_parents fixture parses")
}

/// `W2→W1, W1→X, V1→X, V1→V2, V2→Y, W3→Y, W4→Y, X→Y`.
pub fn instruments() -> Dag {
    parse_graph(INSTRUMENTS).expect("instruments fixture parses")
}

/// `X→T, L→T, L→Z, Y→Z`.
pub fn collider() -> Dag {
    parse_graph(COLLIDER).expect("collider fixture parses")
}
