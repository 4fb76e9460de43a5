// SPDX-License-Identifier: Apache-2.0
//! Markov boundaries of the treatment, with the removal trace and a check
//! that the deletion order does not matter.
//!
//! cargo run --example markov_boundary

use cequiv::boundary::{markov_boundary, markov_boundary_in_order, reduced_markov_boundary};
use cequiv::{fixtures, NodeId, VarSet};

fn main() -> cequiv::Result<()> {
    let g = fixtures::instruments();
    for s in ["W1,W2", "W2,V2", "V1,W3", "W3", "V1,V2,W1,W2,W3,W4"] {
        let s: VarSet = s.parse()?;
        let r = markov_boundary(&g, "X", &s)?;
        println!("{s} -> {}", r.boundary);
        for step in &r.removed {
            println!("    drop {} (X ⊥ {} | {})", step.node, step.node, step.given);
        }
    }

    let all: VarSet = "V1,V2,W1,W2,W3,W4".parse()?;
    let mut reversed: Vec<NodeId> = all.iter().cloned().collect();
    reversed.reverse();
    let r = markov_boundary_in_order(&g, "X", &all, &reversed)?;
    println!("\nreverse order: {} after {} removals", r.boundary, r.removed.len());

    // the reduced variant also drops members unrelated to the outcome
    let g2: cequiv::Dag = "X -> C\nX -> Y\nU -> X\nU -> Y".parse()?;
    let s: VarSet = "C,U".parse()?;
    println!(
        "\nwith a child C of X: boundary {}, reduced {}",
        markov_boundary(&g2, "X", &s)?.boundary,
        reduced_markov_boundary(&g2, "X", "Y", &s)?
    );
    Ok(())
}
