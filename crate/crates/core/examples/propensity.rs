// SPDX-License-Identifier: Apache-2.0
//! Adjusting for a propensity score instead of the covariates it summarizes.
//!
//! cargo run --example propensity

use std::collections::BTreeMap;

use cequiv::oracle::random_model;
use cequiv::{Dag, NodeId, VarSet};

fn main() -> cequiv::Result<()> {
    let g: Dag = "A -> X\nB -> X\nA -> Y\nB -> Y\nX -> Y".parse()?;
    let arity: BTreeMap<NodeId, usize> = [("A", 3), ("B", 2), ("Y", 3)]
        .into_iter()
        .map(|(n, k)| (NodeId::new(n).unwrap(), k))
        .collect();
    let d = random_model(&g, &arity, 7)?.joint()?;
    let z: VarSet = "A,B".parse()?;

    let scores = d.propensity("X", &z)?;
    let (strata, n) = scores.strata();
    println!("{} covariate cells, {n} distinct scores", scores.entries.len());
    for (cell, (score, stratum)) in scores.entries.iter().zip(&strata).enumerate() {
        println!("  cell {cell}: P(X=1 | z) = {:.4}  stratum {:?}", score.unwrap(), stratum.unwrap());
    }

    let direct = d.adjustment_estimand("X", "Y", &z)?;
    let coarse = d.propensity_adjustment("X", "Y", &z)?;
    println!("A(x, y, Z) vs A(x, y, L(Z)): max gap {:.2e}", direct.max_abs_diff(&coarse));
    Ok(())
}
