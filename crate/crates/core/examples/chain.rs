// SPDX-License-Identifier: Apache-2.0
//! Walk from one covariate set to an equivalent one, a variable at a time.
//!
//! cargo run --example chain

use cequiv::equivalence::equivalence_chain;
use cequiv::fixtures;

fn main() -> cequiv::Result<()> {
    let g = fixtures::instruments();
    for (t, z) in [("W1,W2,V1", "V2,W3"), ("W1,W2", "W1,W3,W4"), ("W1,W2,V1", "W3")] {
        println!("{{{t}}} to {{{z}}}:");
        match equivalence_chain(&g, "X", "Y", &t.parse()?, &z.parse()?)? {
            Some(ch) => {
                for (i, license) in ch.licenses.iter().enumerate() {
                    println!("  {} ≈ {}   [{license}]", ch.steps[i], ch.steps[i + 1]);
                }
            }
            None => println!("  not c-equivalent, no chain"),
        }
    }
    Ok(())
}
