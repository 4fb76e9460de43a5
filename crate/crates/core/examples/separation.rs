// SPDX-License-Identifier: Apache-2.0
//! d-separation with each backend, plus an open trail as a witness.
//!
//! cargo run --example separation

use cequiv::fixtures;
use cequiv::separation::{d_separated, find_open_trail, is_path_blocked, Backend, SeparationQuery, Trail};
use cequiv::VarSet;

fn main() -> cequiv::Result<()> {
    let g = fixtures::instruments();
    let set = |s: &str| s.parse::<VarSet>();

    for (a, b, s) in [("W2", "Y", ""), ("W2", "Y", "X"), ("W2", "Y", "X,W1"), ("X", "W3", "Y")] {
        let q = SeparationQuery::new(&g, set(a)?, set(b)?, set(s)?)?;
        let verdicts: Vec<String> = [Backend::Paths, Backend::Moral, Backend::Reach]
            .iter()
            .map(|&be| format!("{be}={}", d_separated(&q, be).unwrap()))
            .collect();
        print!("{a} ⊥ {b} | {{{s}}}: {}", verdicts.join(" "));
        match find_open_trail(&g, q.a(), q.b(), q.s())? {
            Some(t) => println!("   open: {t}"),
            None => println!(),
        }
    }

    // conditioning on a collider opens the trail through it
    let t = Trail::parse(&g, "W2 -> W1 -> X <- V1 -> V2 -> Y")?;
    println!("\n{t}");
    for s in ["", "X", "X,V1"] {
        println!("  blocked given {{{s}}}: {}", is_path_blocked(&g, &t, &set(s)?)?);
    }
    Ok(())
}
