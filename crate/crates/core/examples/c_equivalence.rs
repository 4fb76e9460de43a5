// SPDX-License-Identifier: Apache-2.0
//! Deciding whether two covariate sets give the same adjustment estimand,
//! and the weaker tests built from independences alone.
//!
//! cargo run --example c_equivalence

use cequiv::equivalence::{
    admissibility_implications, boundary_union_equivalent, c_equivalent, c_equivalent_reduced,
    pairwise_sufficient, set_subset_equivalent,
};
use cequiv::{fixtures, VarSet};

fn main() -> cequiv::Result<()> {
    let g = fixtures::instruments();
    let pairs = [("W1,W2", "W1,W3"), ("W2", "W3"), ("V1", "V2"), ("W1", "W2"), ("W2,V2", "V1,W3")];
    println!("{:<12} {:<12} {:<7} {:<16} {:<10} union-test", "T", "Z", "equiv", "reason", "pairwise");
    for (t, z) in pairs {
        let (ts, zs): (VarSet, VarSet) = (t.parse()?, z.parse()?);
        let v = c_equivalent(&g, "X", "Y", &ts, &zs)?;
        println!(
            "{:<12} {:<12} {:<7} {:<16} {:<10} {}",
            t,
            z,
            v.equivalent,
            v.reason.to_string(),
            pairwise_sufficient(&g, "X", "Y", &ts, &zs)?.to_string(),
            boundary_union_equivalent(&g, "X", "Y", &ts, &zs)?
        );
    }

    let g1 = fixtures::side_parents();
    let p = set_subset_equivalent(&g1, "X", "Y", &"V1,W2".parse()?, &"V2,W1".parse()?)?;
    if let Some(p) = p {
        println!("\n{{V1, W2}} ≈ {{V1, V2, W1, W2}} via the split {} + {}", p.s1, p.s2);
    }

    let r = admissibility_implications(&g, "X", "Y", &"W2,V2".parse()?, &"V1,W3".parse()?)?;
    println!(
        "implied independences for {{W2, V2}} and {{V1, W3}}: {} and {}",
        r.holds_given_z_boundary, r.holds_given_t_boundary
    );

    // sets holding descendants of X need the reduced comparison
    let c = fixtures::collider();
    let err = c_equivalent(&c, "X", "Y", &"T".parse()?, &"Z".parse()?).unwrap_err();
    println!("\ncollider: {err}");
    for z in ["Z", "T,Z"] {
        let v = c_equivalent_reduced(&c, "X", "Y", &"T".parse()?, &z.parse()?)?;
        println!("  reduced {{T}} vs {{{z}}}: {}", v.equivalent);
    }
    Ok(())
}
