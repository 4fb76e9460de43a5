// SPDX-License-Identifier: Apache-2.0
//! Rule out candidate diagrams whose predicted equivalences and
//! independences fail in the data.
//!
//! cargo run --example falsify

use cequiv::falsify::{demo_candidates, falsify, DEFAULT_TOL};
use cequiv::oracle::random_binary_model;
use cequiv::VarSet;

fn main() -> cequiv::Result<()> {
    let candidates = demo_candidates();
    let labels = ["(a)", "(b)", "(c)"];
    let (t, z): (VarSet, VarSet) = ("T".parse()?, "Z".parse()?);
    for truth in [2, 1, 0] {
        let d = random_binary_model(&candidates[truth], 3)?.joint()?;
        let report = falsify(&d, &candidates, "X", "Y", &t, &z, DEFAULT_TOL)?;
        println!("data from {}:", labels[truth]);
        for c in &report.candidates {
            let refuted: Vec<String> = c.predictions.iter().filter(|p| p.refuted).map(|p| p.claim.to_string()).collect();
            println!(
                "  {} {:<10} {} prediction(s), refuted: {}",
                labels[c.index],
                if c.rejected { "rejected" } else { "survives" },
                c.predictions.len(),
                if refuted.is_empty() { "none".to_string() } else { refuted.join("; ") }
            );
        }
    }
    Ok(())
}
