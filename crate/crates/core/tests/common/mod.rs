// SPDX-License-Identifier: Apache-2.0
//! Reference implementations used only by the tests.
//!
//! These read nothing from the library but node names, edge lists and
//! conditional tables, and compute everything else the slow, obvious way.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cequiv::graph::random_dag;
use cequiv::oracle::DiscreteModel;
use cequiv::{Dag, NodeId, VarSet};

pub fn set(s: &str) -> VarSet {
    s.parse().unwrap()
}

pub fn dag_from_seed(n: usize, p: f64, seed: u64) -> Dag {
    random_dag(&mut ChaCha8Rng::seed_from_u64(seed), n, p)
}

type Names = BTreeSet<String>;

fn names(s: &VarSet) -> Names {
    s.iter().map(|n| n.to_string()).collect()
}

/// Edges as a parent map keyed by name.
fn parents(g: &Dag) -> BTreeMap<String, Names> {
    let mut m: BTreeMap<String, Names> = g.nodes().iter().map(|n| (n.to_string(), Names::new())).collect();
    for (p, c) in g.edges() {
        m.get_mut(c.as_str()).unwrap().insert(p.to_string());
    }
    m
}

fn descendants_of(pa: &BTreeMap<String, Names>, v: &str) -> Names {
    let mut out = Names::from([v.to_string()]);
    loop {
        let grown: Names = pa
            .iter()
            .filter(|(c, ps)| !out.contains(*c) && ps.iter().any(|p| out.contains(p)))
            .map(|(c, _)| c.clone())
            .collect();
        if grown.is_empty() {
            return out;
        }
        out.extend(grown);
    }
}

/// d-separation by listing every simple trail from `a` to `b` and checking
/// each interior node against the textbook blocking rule.
pub fn naive_dsep(g: &Dag, a: &VarSet, b: &VarSet, s: &VarSet) -> bool {
    let pa = parents(g);
    let (a, b, s) = (names(a), names(b), names(s));
    let adjacent = |u: &str, v: &str| pa[u].contains(v) || pa[v].contains(u);
    let all: Vec<String> = pa.keys().cloned().collect();

    fn walk(
        path: &mut Vec<String>,
        b: &Names,
        all: &[String],
        adjacent: &dyn Fn(&str, &str) -> bool,
        found: &mut dyn FnMut(&[String]) -> bool,
    ) -> bool {
        let last = path.last().unwrap().clone();
        if path.len() > 1 && b.contains(&last) {
            return found(path);
        }
        for v in all {
            if !path.contains(v) && adjacent(&last, v) {
                path.push(v.clone());
                if walk(path, b, all, adjacent, found) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }

    let mut open_trail = |path: &[String]| {
        path.windows(3).all(|w| {
            let collider = pa[&w[1]].contains(&w[0]) && pa[&w[1]].contains(&w[2]);
            if collider {
                descendants_of(&pa, &w[1]).iter().any(|d| s.contains(d))
            } else {
                !s.contains(&w[1])
            }
        })
    };
    for start in &a {
        let mut path = vec![start.clone()];
        if walk(&mut path, &b, &all, &adjacent, &mut open_trail) {
            return false;
        }
    }
    true
}

/// Joint probabilities keyed by full state, from the model's tables.
pub fn naive_joint(m: &DiscreteModel) -> BTreeMap<Vec<usize>, f64> {
    let g = m.dag();
    let nodes: Vec<NodeId> = g.nodes().to_vec();
    let arity: Vec<usize> = nodes.iter().map(|n| m.arity(n).unwrap()).collect();
    let pa = parents(g);
    let pos = |name: &str| nodes.iter().position(|n| n.as_str() == name).unwrap();
    let mut out = BTreeMap::new();
    let mut state = vec![0usize; nodes.len()];
    loop {
        let mut p = 1.0;
        for (i, n) in nodes.iter().enumerate() {
            let ps: Vec<usize> = pa[n.as_str()].iter().map(|q| state[pos(q)]).collect();
            p *= m.row(n, &ps).unwrap()[state[i]];
        }
        out.insert(state.clone(), p);
        let mut i = nodes.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            state[i] += 1;
            if state[i] < arity[i] {
                break;
            }
            state[i] = 0;
        }
    }
}

/// `Σ_z P(y | x, z) P(z)` straight from the joint, as `[x][y]` rows.
pub fn naive_adjustment(m: &DiscreteModel, x: &str, y: &str, z: &VarSet) -> Vec<Vec<f64>> {
    let joint = naive_joint(m);
    let nodes: Vec<String> = m.dag().nodes().iter().map(|n| n.to_string()).collect();
    let pos = |name: &str| nodes.iter().position(|n| n == name).unwrap();
    let (xi, yi) = (pos(x), pos(y));
    let zi: Vec<usize> = z.iter().map(|n| pos(n)).collect();
    let (nx, ny) = (m.arity(x).unwrap(), m.arity(y).unwrap());

    let mut pz: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut pxz: BTreeMap<(usize, Vec<usize>), f64> = BTreeMap::new();
    let mut pxyz: BTreeMap<(usize, usize, Vec<usize>), f64> = BTreeMap::new();
    for (state, p) in &joint {
        let zs: Vec<usize> = zi.iter().map(|&i| state[i]).collect();
        *pz.entry(zs.clone()).or_default() += p;
        *pxz.entry((state[xi], zs.clone())).or_default() += p;
        *pxyz.entry((state[xi], state[yi], zs)).or_default() += p;
    }
    let mut out = vec![vec![0.0; ny]; nx];
    for (zs, p) in &pz {
        if *p == 0.0 {
            continue;
        }
        for (xv, row) in out.iter_mut().enumerate() {
            let denom = pxz[&(xv, zs.clone())];
            for (yv, cell) in row.iter_mut().enumerate() {
                *cell += pxyz[&(xv, yv, zs.clone())] / denom * p;
            }
        }
    }
    out
}

pub fn max_diff(a: &[Vec<f64>], b: &cequiv::oracle::EstimandTable) -> f64 {
    a.iter()
        .enumerate()
        .flat_map(|(x, row)| row.iter().enumerate().map(move |(y, v)| (v - b.get(x, y)).abs()))
        .fold(0.0, f64::max)
}
