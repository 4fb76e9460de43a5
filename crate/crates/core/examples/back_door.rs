// SPDX-License-Identifier: Apache-2.0
//! Back-door admissibility, witnesses and minimal admissible sets.
//!
//! cargo run --example back_door

use cequiv::admissibility::{back_door_graph, g_admissible, minimal_admissible_sets, minimal_admissible_subset};
use cequiv::{fixtures, VarSet};

fn main() -> cequiv::Result<()> {
    let g = fixtures::side_parents();
    println!("back-door graph drops {} edge(s)", g.edge_count() - back_door_graph(&g, "X")?.edge_count());

    for s in ["V1", "V2,W1", "W1,W2", "", "V1,Y"] {
        let s: VarSet = s.parse()?;
        match g_admissible(&g, "X", "Y", &s) {
            Ok(v) => {
                print!("{s}: admissible={}", v.admissible);
                if let Some(t) = v.open_backdoor {
                    print!("  open: {t}");
                }
                println!();
            }
            Err(e) => println!("{s}: {e}"),
        }
    }

    let full: VarSet = "V1,V2,W1,W2".parse()?;
    if let Some(m) = minimal_admissible_subset(&g, "X", "Y", &full)? {
        println!("\nminimal subset of {full}: {m}");
    }
    let all = minimal_admissible_sets(&g, "X", "Y")?;
    println!("all minimal admissible sets: {}", all.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "));

    // a mediator is never admissible
    let m: cequiv::Dag = "X -> M -> Y\nU -> X\nU -> Y".parse()?;
    let v = g_admissible(&m, "X", "Y", &"M,U".parse()?)?;
    println!("\n{{M, U}} with mediator M: descendants {}", v.violating_descendants);
    Ok(())
}
