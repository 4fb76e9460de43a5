// SPDX-License-Identifier: Apache-2.0
//! Decide every pair of covariate sets on a random graph and confirm each
//! verdict numerically.
//!
//! cargo run --release --example sweep -- [seed]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cequiv::equivalence::EquivalenceTester;
use cequiv::graph::random_dag;
use cequiv::oracle::{random_binary_model, search_violation, CONFIRM_TOL};
use cequiv::{NodeId, VarSet};

fn main() -> cequiv::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_dag(&mut rng, 7, 0.4);
    let order = g.topological_order();
    let (x, y) = (&order[1], &order[order.len() - 1]);
    println!("graph:\n{}treatment {x}, outcome {y}", g.to_native());

    let tester = EquivalenceTester::new(&g, x, y)?;
    let pool: Vec<NodeId> = tester.candidates().iter().cloned().collect();
    let sets: Vec<VarSet> = (0..1usize << pool.len())
        .map(|m| pool.iter().enumerate().filter(|(j, _)| m >> j & 1 == 1).map(|(_, n)| n.clone()).collect())
        .collect();

    let models: Vec<_> = (0..10).map(|s| random_binary_model(&g, s).and_then(|m| m.joint())).collect::<Result<_, _>>()?;
    let (mut equivalent, mut refuted, mut disagreements) = (0usize, 0, 0);
    for (i, t) in sets.iter().enumerate() {
        for z in &sets[i + 1..] {
            if tester.equivalent(t, z)? {
                equivalent += 1;
                for d in &models {
                    let gap = d.adjustment_estimand(x, y, t)?.max_abs_diff(&d.adjustment_estimand(x, y, z)?);
                    if gap > CONFIRM_TOL {
                        disagreements += 1;
                    }
                }
            } else if search_violation(&g, x, y, t, z, 50, 0)?.is_some() {
                refuted += 1;
            }
        }
    }
    let total = sets.len() * (sets.len() - 1) / 2;
    println!("{total} pairs, {equivalent} equivalent with {disagreements} numeric disagreements");
    println!("{refuted} of the {} others have a numeric counterexample", total - equivalent);
    Ok(())
}
