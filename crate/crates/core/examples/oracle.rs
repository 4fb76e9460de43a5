// SPDX-License-Identifier: Apache-2.0
//! Exact estimands on a random discrete model: adjustment versus the
//! interventional distribution, and a counterexample search.
//!
//! cargo run --example oracle

use cequiv::fixtures;
use cequiv::oracle::{random_binary_model, search_violation, write_model};
use cequiv::VarSet;

fn main() -> cequiv::Result<()> {
    let g = fixtures::side_parents();
    let m = random_binary_model(&g, 42)?;
    println!("model:\n{}", write_model(&m));

    let effect = m.causal_effect("X", "Y")?;
    println!("P(Y=1 | do(X=x)) = {:.6} / {:.6}", effect.get(0, 1), effect.get(1, 1));
    for z in ["", "V1", "V2,W1", "W1", "V1,V2,W1,W2"] {
        let z: VarSet = z.parse()?;
        let a = m.adjustment_estimand("X", "Y", &z)?;
        println!("A(X, Y, {z:<18}) gap to effect {:.2e}", a.max_abs_diff(&effect));
    }

    let found = search_violation(&g, "X", "Y", &"V1".parse()?, &"W1".parse()?, 100, 0)?;
    if let Some(v) = found {
        println!("\n{{V1}} vs {{W1}} differ on attempt {} (seed {}) by {:.3e}", v.attempt, v.seed, v.gap);
    }
    let none = search_violation(&g, "X", "Y", &"V1".parse()?, &"V2,W2".parse()?, 100, 0)?;
    println!("{{V1}} vs {{V2, W2}}: counterexample found = {}", none.is_some());
    Ok(())
}
