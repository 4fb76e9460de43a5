// SPDX-License-Identifier: Apache-2.0
//! Discrete Bayesian networks on a DAG.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1};
use serde::Serialize;

use super::distribution::{state_count, Distribution, EstimandTable};
use crate::error::{Error, Result};
use crate::graph::{bits, Dag, NodeId, VarSet};

/// Rows of a conditional table must sum to one within this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A DAG with a state count per node and one conditional probability table
/// per node.
///
/// The table of node `v` has one row per configuration of its parents, taken
/// in canonical name order with the first parent most significant; each row
/// lists `P(v = k | parents)` for `k = 0..arity(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel {
    dag: Dag,
    arity: Vec<usize>,
    cpts: Vec<Vec<f64>>,
}

impl DiscreteModel {
    /// Assembles a model; `cpts[v]` holds the rows of node `v` in order.
    pub fn new(dag: Dag, arity: &BTreeMap<NodeId, usize>, cpts: &BTreeMap<NodeId, Vec<Vec<f64>>>) -> Result<Self> {
        let mut ar = Vec::with_capacity(dag.len());
        for n in dag.nodes() {
            let a = *arity
                .get(n)
                .ok_or_else(|| Error::InvalidModel(format!("no arity for {n}")))?;
            if a < 2 {
                return Err(Error::InvalidModel(format!("arity of {n} is {a}, expected at least 2")));
            }
            ar.push(a);
        }
        if let Some(extra) = arity.keys().chain(cpts.keys()).find(|n| !dag.contains(n)) {
            return Err(Error::UnknownNode(extra.to_string()));
        }
        state_count(&ar)?;
        let mut flat = Vec::with_capacity(dag.len());
        for (i, n) in dag.nodes().iter().enumerate() {
            let rows = cpts
                .get(n)
                .ok_or_else(|| Error::InvalidModel(format!("no table for {n}")))?;
            let expected: usize = bits(dag.parent_mask(i)).map(|p| ar[p]).product();
            if rows.len() != expected {
                return Err(Error::InvalidModel(format!(
                    "{n} needs {expected} rows, found {}",
                    rows.len()
                )));
            }
            let mut table = Vec::with_capacity(expected * ar[i]);
            for (r, row) in rows.iter().enumerate() {
                check_row(n, r, row, ar[i])?;
                table.extend_from_slice(row);
            }
            flat.push(table);
        }
        Ok(DiscreteModel {
            dag,
            arity: ar,
            cpts: flat,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn arity(&self, name: &str) -> Result<usize> {
        Ok(self.arity[self.dag.idx(name)?])
    }

    /// All rows of `name`'s table, concatenated.
    pub fn table(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.cpts[self.dag.idx(name)?])
    }

    /// `P(name = · | parents = parent_states)`, parents in canonical order.
    pub fn row(&self, name: &str, parent_states: &[usize]) -> Result<&[f64]> {
        let i = self.dag.idx(name)?;
        let parents: Vec<usize> = bits(self.dag.parent_mask(i)).collect();
        if parent_states.len() != parents.len()
            || parents.iter().zip(parent_states).any(|(&p, &s)| s >= self.arity[p])
        {
            return Err(Error::InvalidQuery(format!("bad parent configuration for {name}")));
        }
        let r = parents
            .iter()
            .zip(parent_states)
            .fold(0, |acc, (&p, &s)| acc * self.arity[p] + s);
        Ok(&self.cpts[i][r * self.arity[i]..(r + 1) * self.arity[i]])
    }

    pub(crate) fn arities(&self) -> &[usize] {
        &self.arity
    }

    /// `P(v = state[v] | parents(v) = state[parents])`.
    fn factor(&self, v: usize, state: &[usize]) -> f64 {
        let r = bits(self.dag.parent_mask(v)).fold(0, |acc, p| acc * self.arity[p] + state[p]);
        self.cpts[v][r * self.arity[v] + state[v]]
    }

    fn for_each_state(&self, mut f: impl FnMut(&[usize])) {
        let n = self.arity.len();
        let mut state = vec![0usize; n];
        loop {
            f(&state);
            let mut i = n;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                state[i] += 1;
                if state[i] < self.arity[i] {
                    break;
                }
                state[i] = 0;
            }
        }
    }

    /// The joint distribution as the product of the node tables.
    pub fn joint(&self) -> Result<Distribution> {
        let size = state_count(&self.arity)?;
        let mut probs = Vec::with_capacity(size);
        self.for_each_state(|s| probs.push((0..s.len()).map(|v| self.factor(v, s)).product()));
        Ok(Distribution::from_parts(
            self.dag.nodes().to_vec(),
            self.arity.clone(),
            probs,
        ))
    }

    /// `P(y | do(x))` by the truncated product: `x`'s own factor is dropped
    /// and `x` is clamped.
    pub fn causal_effect(&self, x: &str, y: &str) -> Result<EstimandTable> {
        let (xi, yi) = (self.dag.idx(x)?, self.dag.idx(y)?);
        if xi == yi {
            return Err(Error::InvalidQuery("x and y must differ".into()));
        }
        state_count(&self.arity)?;
        let mut out = EstimandTable::zeros(self.arity[xi], self.arity[yi]);
        self.for_each_state(|s| {
            let w: f64 = (0..s.len()).filter(|&v| v != xi).map(|v| self.factor(v, s)).product();
            out.add(s[xi], s[yi], w);
        });
        Ok(out)
    }

    /// Adjustment estimand for `z` computed from [`DiscreteModel::joint`].
    pub fn adjustment_estimand(&self, x: &str, y: &str, z: &VarSet) -> Result<EstimandTable> {
        self.joint()?.adjustment_estimand(x, y, z)
    }
}

fn check_row(n: &NodeId, r: usize, row: &[f64], arity: usize) -> Result<()> {
    if row.len() != arity {
        return Err(Error::InvalidModel(format!(
            "row {r} of {n} has {} entries, expected {arity}",
            row.len()
        )));
    }
    if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::InvalidModel(format!("row {r} of {n} has an entry outside [0, 1]")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::InvalidModel(format!("row {r} of {n} sums to {sum}")));
    }
    Ok(())
}

/// Draws a model on `g` whose table rows are independent uniform samples from
/// the probability simplex. Nodes missing from `arity` are binary.
pub fn random_model(g: &Dag, arity: &BTreeMap<NodeId, usize>, seed: u64) -> Result<DiscreteModel> {
    let ar: Vec<usize> = g.nodes().iter().map(|n| arity.get(n).copied().unwrap_or(2)).collect();
    if let Some(&a) = ar.iter().find(|&&a| a < 2) {
        return Err(Error::InvalidModel(format!("arity {a} below 2")));
    }
    if let Some(extra) = arity.keys().find(|n| !g.contains(n)) {
        return Err(Error::UnknownNode(extra.to_string()));
    }
    state_count(&ar)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cpts = (0..g.len())
        .map(|v| {
            let rows: usize = bits(g.parent_mask(v)).map(|p| ar[p]).product();
            let mut table = Vec::with_capacity(rows * ar[v]);
            for _ in 0..rows {
                let draw: Vec<f64> = (0..ar[v]).map(|_| Exp1.sample(&mut rng)).collect();
                let total: f64 = draw.iter().sum();
                table.extend(draw.iter().map(|d| d / total));
            }
            table
        })
        .collect();
    Ok(DiscreteModel {
        dag: g.clone(),
        arity: ar,
        cpts,
    })
}

/// A binary model on `g`.
pub fn random_binary_model(g: &Dag, seed: u64) -> Result<DiscreteModel> {
    random_model(g, &BTreeMap::new(), seed)
}

/// Compares the adjustment estimands of `t` and `z` on one model.
pub fn empirically_c_equivalent(
    m: &DiscreteModel,
    x: &str,
    y: &str,
    t: &VarSet,
    z: &VarSet,
    tol: f64,
) -> Result<bool> {
    Ok(estimand_gap(&m.joint()?, x, y, t, z)? <= tol)
}

/// Largest entrywise difference between `A(x, y, t)` and `A(x, y, z)`.
pub fn estimand_gap(d: &Distribution, x: &str, y: &str, t: &VarSet, z: &VarSet) -> Result<f64> {
    let a = d.adjustment_estimand(x, y, t)?;
    let b = d.adjustment_estimand(x, y, z)?;
    Ok(a.max_abs_diff(&b))
}

pub fn conditionally_independent(m: &DiscreteModel, a: &VarSet, b: &VarSet, s: &VarSet, tol: f64) -> Result<bool> {
    m.joint()?.conditionally_independent(a, b, s, tol)
}

/// A gap larger than this counts as a witnessed non-equivalence.
pub const VIOLATION_THRESHOLD: f64 = 1e-6;

/// A model on which two adjustment sets give different estimands.
#[derive(Debug, Clone)]
pub struct Violation {
    pub attempt: usize,
    pub seed: u64,
    pub gap: f64,
    pub model: DiscreteModel,
}

#[derive(Debug, Clone, Serialize)]
pub struct ViolationSummary {
    pub attempt: usize,
    pub seed: u64,
    pub gap: f64,
}

impl Violation {
    pub fn summary(&self) -> ViolationSummary {
        ViolationSummary {
            attempt: self.attempt,
            seed: self.seed,
            gap: self.gap,
        }
    }
}

/// Seed used for attempt `i` of a search started at `seed`.
pub fn attempt_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

/// Tries up to `attempts` random binary models and returns the first one on
/// which `t` and `z` disagree by more than [`VIOLATION_THRESHOLD`].
pub fn search_violation(
    g: &Dag,
    x: &str,
    y: &str,
    t: &VarSet,
    z: &VarSet,
    attempts: usize,
    seed: u64,
) -> Result<Option<Violation>> {
    for attempt in 0..attempts {
        let s = attempt_seed(seed, attempt);
        let model = random_binary_model(g, s)?;
        let gap = estimand_gap(&model.joint()?, x, y, t, z)?;
        if gap > VIOLATION_THRESHOLD {
            return Ok(Some(Violation {
                attempt,
                seed: s,
                gap,
                model,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn set(s: &str) -> VarSet {
        s.parse().unwrap()
    }

    fn confounded() -> DiscreteModel {
        // U -> X, U -> Y, X -> Y
        let g: Dag = "U -> X\nU -> Y\nX -> Y".parse().unwrap();
        let arity = g.nodes().iter().map(|n| (n.clone(), 2)).collect();
        let mut cpts = BTreeMap::new();
        cpts.insert(NodeId::new("U").unwrap(), vec![vec![0.4, 0.6]]);
        cpts.insert(NodeId::new("X").unwrap(), vec![vec![0.8, 0.2], vec![0.3, 0.7]]);
        // parents of Y in order (U, X)
        cpts.insert(
            NodeId::new("Y").unwrap(),
            vec![vec![0.9, 0.1], vec![0.5, 0.5], vec![0.6, 0.4], vec![0.2, 0.8]],
        );
        DiscreteModel::new(g, &arity, &cpts).unwrap()
    }

    #[test]
    fn joint_sums_to_one() {
        let m = random_binary_model(&fixtures::side_parents(), 7).unwrap();
        let j = m.joint().unwrap();
        assert!((j.total() - 1.0).abs() < 1e-12);
        assert_eq!(j.probs().len(), 1 << 6);
    }

    #[test]
    fn hand_computed_effect() {
        let m = confounded();
        let e = m.causal_effect("X", "Y").unwrap();
        // P(Y=1 | do(X=1)) = 0.4 * 0.5 + 0.6 * 0.8
        assert!((e.get(1, 1) - 0.68).abs() < 1e-15);
        assert!((e.get(0, 1) - (0.4 * 0.1 + 0.6 * 0.4)).abs() < 1e-15);
        let a = m.adjustment_estimand("X", "Y", &set("U")).unwrap();
        assert!(a.max_abs_diff(&e) < 1e-12);
        let naive = m.adjustment_estimand("X", "Y", &set("")).unwrap();
        assert!(naive.max_abs_diff(&e) > 1e-3);
    }

    #[test]
    fn row_lookup() {
        let m = confounded();
        assert_eq!(m.row("Y", &[1, 0]).unwrap(), &[0.6, 0.4]);
        assert!(m.row("Y", &[2, 0]).is_err());
        assert!(m.row("Y", &[0]).is_err());
    }

    #[test]
    fn seeded_models_are_reproducible() {
        let g = fixtures::instruments();
        assert_eq!(random_binary_model(&g, 3).unwrap(), random_binary_model(&g, 3).unwrap());
        assert_ne!(random_binary_model(&g, 3).unwrap(), random_binary_model(&g, 4).unwrap());
    }

    #[test]
    fn validation() {
        let g: Dag = "A -> B".parse().unwrap();
        let arity: BTreeMap<_, _> = g.nodes().iter().map(|n| (n.clone(), 2)).collect();
        let mut cpts = BTreeMap::new();
        cpts.insert(NodeId::new("A").unwrap(), vec![vec![0.5, 0.5]]);
        cpts.insert(NodeId::new("B").unwrap(), vec![vec![0.5, 0.5]]);
        assert!(DiscreteModel::new(g.clone(), &arity, &cpts).is_err());
        cpts.insert(NodeId::new("B").unwrap(), vec![vec![0.5, 0.5], vec![0.5, 0.6]]);
        assert!(DiscreteModel::new(g.clone(), &arity, &cpts).is_err());
        cpts.insert(NodeId::new("B").unwrap(), vec![vec![0.5, 0.5], vec![0.1, 0.9]]);
        assert!(DiscreteModel::new(g, &arity, &cpts).is_ok());
    }

    #[test]
    fn state_space_cap() {
        let names = (0..25).map(|i| NodeId::new(format!("N{i}")).unwrap());
        let g = Dag::new(names, []).unwrap();
        assert!(matches!(random_binary_model(&g, 0), Err(Error::StateSpaceTooLarge(_))));
    }

    #[test]
    fn violation_found_for_inadmissible_set() {
        let g = fixtures::side_parents();
        let v = search_violation(&g, "X", "Y", &set("V1"), &set("W1"), 10, 1).unwrap();
        let v = v.expect("an open back-door path should show up immediately");
        assert_eq!(v.attempt, 0);
        assert!(v.gap > VIOLATION_THRESHOLD);
        let none = search_violation(&g, "X", "Y", &set("V1"), &set("V1,W2"), 10, 1).unwrap();
        assert!(none.is_none());
    }
}
