// SPDX-License-Identifier: Apache-2.0
//! Parse a diagram, query its structure and print it in both formats.
//!
//! cargo run --example graphs

use cequiv::{parse_graph, VarSet};

fn main() -> cequiv::Result<()> {
    let g = parse_graph(
        "# a chain, a fork and a collider
         Smoking -> Tar -> Cancer
         Genotype -> Smoking
         Genotype -> Cancer
         Cancer -> Cough
         Cold -> Cough",
    )?;
    println!("{} nodes, {} edges", g.len(), g.edge_count());
    let order: Vec<String> = g.topological_order().iter().map(|n| n.to_string()).collect();
    println!("topological order: {}", order.join(" "));

    let smoking: VarSet = "Smoking".parse()?;
    println!("descendants of Smoking: {}", g.descendants(&smoking)?);
    println!("ancestors of Cough: {}", g.ancestors(&"Cough".parse()?)?);

    let anc = g.ancestral_subgraph(&"Cancer,Cold".parse()?)?;
    println!("ancestral graph of {{Cancer, Cold}}: {} nodes", anc.len());
    let moral = g.moralize();
    println!("moral graph marries Cancer and Cold: {}", moral.has_edge("Cancer", "Cold"));

    println!("\nnative:\n{}", g.to_native());
    println!("DOT:\n{}", g.to_dot());

    match parse_graph("A -> B\nB -> A") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
