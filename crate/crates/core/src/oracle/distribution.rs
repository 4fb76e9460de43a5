// SPDX-License-Identifier: Apache-2.0
//! Exact joint distributions over discrete variables.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{NodeId, VarSet};

/// Largest joint table the oracle will materialize.
pub const MAX_STATES: u128 = 1 << 24;

/// A full joint probability table.
///
/// Variables are kept in canonical name order; a joint state is indexed in
/// mixed radix with the first variable most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    names: Vec<NodeId>,
    arity: Vec<usize>,
    probs: Vec<f64>,
}

/// `A(x, y, ·)` or `P(y | do(x))`, indexed `[x][y]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimandTable {
    pub x_arity: usize,
    pub y_arity: usize,
    pub values: Vec<f64>,
}

impl EstimandTable {
    pub(crate) fn zeros(x_arity: usize, y_arity: usize) -> Self {
        EstimandTable {
            x_arity,
            y_arity,
            values: vec![0.0; x_arity * y_arity],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.y_arity + y]
    }

    pub(crate) fn add(&mut self, x: usize, y: usize, p: f64) {
        self.values[x * self.y_arity + y] += p;
    }

    pub fn max_abs_diff(&self, other: &EstimandTable) -> f64 {
        assert_eq!(
            (self.x_arity, self.y_arity),
            (other.x_arity, other.y_arity),
            "tables over different arities"
        );
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.values[x * self.y_arity..(x + 1) * self.y_arity]
    }
}

/// `P(X = 1 | z)` for each configuration of `z`, `None` where `P(z) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropensityTable {
    pub z: VarSet,
    pub z_arity: Vec<usize>,
    pub entries: Vec<Option<f64>>,
}

/// Propensity values closer than this are merged into one stratum.
pub const PROPENSITY_MERGE_TOL: f64 = 1e-12;

impl PropensityTable {
    /// Stratum index of each `z` configuration after merging equal scores;
    /// zero-mass configurations get no stratum.
    pub fn strata(&self) -> (Vec<Option<usize>>, usize) {
        let mut values: Vec<f64> = self.entries.iter().flatten().copied().collect();
        values.sort_by(f64::total_cmp);
        let mut reps: Vec<f64> = Vec::new();
        for v in values {
            if reps.last().is_none_or(|&r| v - r > PROPENSITY_MERGE_TOL) {
                reps.push(v);
            }
        }
        let classes = self
            .entries
            .iter()
            .map(|e| {
                e.map(|v| {
                    // last representative not above v + tol
                    reps.iter().rposition(|&r| r <= v + PROPENSITY_MERGE_TOL).unwrap()
                })
            })
            .collect();
        (classes, reps.len())
    }
}

impl Distribution {
    /// Builds a distribution from unnormalized non-negative masses (counts
    /// or probabilities).
    pub fn new(names: Vec<NodeId>, arity: Vec<usize>, masses: Vec<f64>) -> Result<Self> {
        if names.len() != arity.len() {
            return Err(Error::InvalidModel("one arity per variable required".into()));
        }
        let mut order: Vec<usize> = (0..names.len()).collect();
        order.sort_by(|&a, &b| names[a].cmp(&names[b]));
        if order.windows(2).any(|w| names[w[0]] == names[w[1]]) {
            return Err(Error::InvalidModel("duplicate variable".into()));
        }
        if let Some(&a) = arity.iter().find(|&&a| a < 2) {
            return Err(Error::InvalidModel(format!("arity {a} below 2")));
        }
        let size = state_count(&arity)?;
        if masses.len() != size {
            return Err(Error::InvalidModel(format!(
                "expected {size} joint entries, found {}",
                masses.len()
            )));
        }
        if masses.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidModel("masses must be finite and non-negative".into()));
        }
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidModel("total mass is zero".into()));
        }
        let given = Distribution {
            names,
            arity,
            probs: masses.into_iter().map(|p| p / total).collect(),
        };
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return Ok(given);
        }
        let mut d = Distribution {
            names: order.iter().map(|&i| given.names[i].clone()).collect(),
            arity: order.iter().map(|&i| given.arity[i]).collect(),
            probs: vec![0.0; size],
        };
        let mut state = vec![0usize; d.names.len()];
        let mut old_state = state.clone();
        for idx in 0..size {
            d.decode(idx, &mut state);
            for (new_pos, &old_pos) in order.iter().enumerate() {
                old_state[old_pos] = state[new_pos];
            }
            d.probs[idx] = given.probs[given.encode(&old_state)];
        }
        Ok(d)
    }

    pub(crate) fn from_parts(names: Vec<NodeId>, arity: Vec<usize>, probs: Vec<f64>) -> Self {
        Distribution { names, arity, probs }
    }

    pub fn names(&self) -> &[NodeId] {
        &self.names
    }

    pub fn arity(&self, name: &str) -> Result<usize> {
        Ok(self.arity[self.idx(name)?])
    }

    pub fn arities(&self) -> &[usize] {
        &self.arity
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Probability of one joint state, listed in canonical variable order.
    pub fn prob(&self, state: &[usize]) -> f64 {
        self.probs[self.encode(state)]
    }

    pub(crate) fn idx(&self, name: &str) -> Result<usize> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(name))
            .map_err(|_| Error::UnknownNode(name.to_string()))
    }

    fn indices(&self, s: &VarSet) -> Result<Vec<usize>> {
        s.iter().map(|n| self.idx(n)).collect()
    }

    pub(crate) fn decode(&self, mut idx: usize, state: &mut [usize]) {
        for i in (0..self.arity.len()).rev() {
            state[i] = idx % self.arity[i];
            idx /= self.arity[i];
        }
    }

    pub(crate) fn encode(&self, state: &[usize]) -> usize {
        state.iter().zip(&self.arity).fold(0, |acc, (&s, &a)| acc * a + s)
    }

    /// Marginal table over `vars` (positions), first most significant.
    pub(crate) fn marginal(&self, vars: &[usize]) -> Vec<f64> {
        let size: usize = vars.iter().map(|&v| self.arity[v]).product();
        let mut out = vec![0.0; size];
        let mut state = vec![0usize; self.arity.len()];
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            self.decode(idx, &mut state);
            let cell = vars.iter().fold(0, |acc, &v| acc * self.arity[v] + state[v]);
            out[cell] += p;
        }
        out
    }

    fn treatment_outcome(&self, x: &str, y: &str, z: &VarSet) -> Result<(usize, usize, Vec<usize>)> {
        let (xi, yi) = (self.idx(x)?, self.idx(y)?);
        if xi == yi {
            return Err(Error::InvalidQuery("x and y must differ".into()));
        }
        if z.contains(x) || z.contains(y) {
            return Err(Error::InvalidQuery(format!("{z} contains {x} or {y}")));
        }
        Ok((xi, yi, self.indices(z)?))
    }

    /// `A(x, y, z) = Σ_z P(y | x, z) P(z)`, skipping zero-mass `z` cells.
    pub fn adjustment_estimand(&self, x: &str, y: &str, z: &VarSet) -> Result<EstimandTable> {
        let (xi, yi, zs) = self.treatment_outcome(x, y, z)?;
        let mut vars = vec![xi, yi];
        vars.extend(&zs);
        let table = self.marginal(&vars);
        let nc: usize = zs.iter().map(|&v| self.arity[v]).product();
        estimand_from_strata(&table, self.arity[xi], self.arity[yi], nc)
    }

    /// Largest `|P(a, b | s) − P(a | s) P(b | s)|` over positive-mass `s`
    /// cells.
    pub fn max_dependence(&self, a: &VarSet, b: &VarSet, s: &VarSet) -> Result<f64> {
        for (p, q) in [(a, b), (a, s), (b, s)] {
            if !p.is_disjoint(q) {
                return Err(Error::InvalidQuery(format!("{p} and {q} overlap")));
            }
        }
        let (ai, bi, si) = (self.indices(a)?, self.indices(b)?, self.indices(s)?);
        if ai.is_empty() || bi.is_empty() {
            return Ok(0.0);
        }
        let card = |v: &[usize]| v.iter().map(|&i| self.arity[i]).product::<usize>();
        let vars: Vec<usize> = ai.iter().chain(&bi).chain(&si).copied().collect();
        let table = self.marginal(&vars);
        Ok(dependence(&table, card(&ai), card(&bi), card(&si)))
    }

    pub fn conditionally_independent(&self, a: &VarSet, b: &VarSet, s: &VarSet, tol: f64) -> Result<bool> {
        Ok(self.max_dependence(a, b, s)? <= tol)
    }

    /// Exact propensity scores `P(X = 1 | z)`; `x` must be binary.
    pub fn propensity(&self, x: &str, z: &VarSet) -> Result<PropensityTable> {
        let xi = self.idx(x)?;
        if self.arity[xi] != 2 {
            return Err(Error::NonBinaryTreatment(self.names[xi].clone()));
        }
        if z.contains(x) {
            return Err(Error::InvalidQuery(format!("{z} contains {x}")));
        }
        let zs = self.indices(z)?;
        let mut vars = zs.clone();
        vars.push(xi);
        let table = self.marginal(&vars);
        let entries = table
            .chunks(2)
            .map(|pz| {
                let total = pz[0] + pz[1];
                (total > 0.0).then(|| pz[1] / total)
            })
            .collect();
        Ok(PropensityTable {
            z: z.clone(),
            z_arity: zs.iter().map(|&i| self.arity[i]).collect(),
            entries,
        })
    }

    /// Joint `P(x, y, l)` where `l` is the propensity stratum of `z`.
    fn by_propensity(&self, x: &str, y: &str, z: &VarSet) -> Result<(Vec<f64>, usize, usize, usize)> {
        let (xi, yi, zs) = self.treatment_outcome(x, y, z)?;
        let (classes, nl) = self.propensity(x, z)?.strata();
        let mut vars = vec![xi, yi];
        vars.extend(&zs);
        let table = self.marginal(&vars);
        let (nx, ny, nc) = (self.arity[xi], self.arity[yi], classes.len());
        let mut out = vec![0.0; nx * ny * nl];
        for xy in 0..nx * ny {
            for (c, class) in classes.iter().enumerate() {
                if let Some(l) = class {
                    out[xy * nl + l] += table[xy * nc + c];
                }
            }
        }
        Ok((out, nx, ny, nl))
    }

    /// `A(x, y, L(z))`: adjustment for the propensity score of `z` treated as
    /// a single variable.
    pub fn propensity_adjustment(&self, x: &str, y: &str, z: &VarSet) -> Result<EstimandTable> {
        let (table, nx, ny, nl) = self.by_propensity(x, y, z)?;
        estimand_from_strata(&table, nx, ny, nl)
    }

    /// Largest dependence between `x` and `y` within propensity strata of `z`.
    pub fn dependence_given_propensity(&self, x: &str, y: &str, z: &VarSet) -> Result<f64> {
        let (table, nx, ny, nl) = self.by_propensity(x, y, z)?;
        Ok(dependence(&table, nx, ny, nl))
    }
}

pub(crate) fn state_count(arity: &[usize]) -> Result<usize> {
    let size = arity.iter().fold(1u128, |acc, &a| acc.saturating_mul(a as u128));
    if size > MAX_STATES {
        return Err(Error::StateSpaceTooLarge(size));
    }
    Ok(size as usize)
}

/// Adjustment estimand from a `[x][y][c]` table of joint masses.
fn estimand_from_strata(table: &[f64], nx: usize, ny: usize, nc: usize) -> Result<EstimandTable> {
    let at = |x: usize, y: usize, c: usize| table[(x * ny + y) * nc + c];
    let mut out = EstimandTable::zeros(nx, ny);
    for c in 0..nc {
        let pc: f64 = (0..nx).flat_map(|x| (0..ny).map(move |y| (x, y))).map(|(x, y)| at(x, y, c)).sum();
        if pc <= 0.0 {
            continue;
        }
        for x in 0..nx {
            let pxc: f64 = (0..ny).map(|y| at(x, y, c)).sum();
            if pxc <= 0.0 {
                return Err(Error::UndefinedConditional { x_state: x });
            }
            for y in 0..ny {
                out.add(x, y, at(x, y, c) / pxc * pc);
            }
        }
    }
    Ok(out)
}

/// Largest `|P(a, b | c) − P(a | c) P(b | c)|` from an `[a][b][c]` table.
fn dependence(table: &[f64], na: usize, nb: usize, nc: usize) -> f64 {
    let at = |a: usize, b: usize, c: usize| table[(a * nb + b) * nc + c];
    let mut worst = 0.0f64;
    for c in 0..nc {
        let pc: f64 = (0..na).flat_map(|a| (0..nb).map(move |b| (a, b))).map(|(a, b)| at(a, b, c)).sum();
        if pc <= 0.0 {
            continue;
        }
        let pa: Vec<f64> = (0..na).map(|a| (0..nb).map(|b| at(a, b, c)).sum::<f64>() / pc).collect();
        let pb: Vec<f64> = (0..nb).map(|b| (0..na).map(|a| at(a, b, c)).sum::<f64>() / pc).collect();
        for (a, qa) in pa.iter().enumerate() {
            for (b, qb) in pb.iter().enumerate() {
                worst = worst.max((at(a, b, c) / pc - qa * qb).abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(s: &str) -> Vec<NodeId> {
        s.split(',').map(|n| NodeId::new(n).unwrap()).collect()
    }

    fn set(s: &str) -> VarSet {
        s.parse().unwrap()
    }

    #[test]
    fn normalizes_and_reorders() {
        // variables given as (B, A); table indexed B-major
        let d = Distribution::new(names("B,A"), vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(d.names()[0].as_str(), "A");
        assert!((d.total() - 1.0).abs() < 1e-15);
        // state (A=2, B=1) was mass 6
        assert!((d.prob(&[2, 1]) - 6.0 / 21.0).abs() < 1e-15);
        assert!((d.prob(&[0, 1]) - 4.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(Distribution::new(names("A"), vec![2], vec![0.5]).is_err());
        assert!(Distribution::new(names("A"), vec![2], vec![0.0, 0.0]).is_err());
        assert!(Distribution::new(names("A"), vec![2], vec![-1.0, 2.0]).is_err());
        assert!(Distribution::new(names("A"), vec![1], vec![1.0]).is_err());
        assert!(Distribution::new(names("A,A"), vec![2, 2], vec![0.25; 4]).is_err());
    }

    #[test]
    fn estimand_with_empty_adjustment_is_conditional() {
        // P(x, y) = [[0.1, 0.3], [0.2, 0.4]]
        let d = Distribution::new(names("X,Y"), vec![2, 2], vec![0.1, 0.3, 0.2, 0.4]).unwrap();
        let a = d.adjustment_estimand("X", "Y", &set("")).unwrap();
        assert!((a.get(0, 1) - 0.75).abs() < 1e-12);
        assert!((a.get(1, 1) - 0.4 / 0.6).abs() < 1e-12);
    }

    #[test]
    fn undefined_conditional_is_an_error() {
        // P(Z=0) > 0 but P(X=1, Z=0) = 0
        let d = Distribution::new(
            names("X,Y,Z"),
            vec![2, 2, 2],
            vec![0.1, 0.1, 0.1, 0.1, 0.0, 0.2, 0.0, 0.4],
        )
        .unwrap();
        assert_eq!(
            d.adjustment_estimand("X", "Y", &set("Z")),
            Err(Error::UndefinedConditional { x_state: 1 })
        );
    }

    #[test]
    fn zero_mass_strata_are_skipped() {
        // Z=1 never occurs
        let d = Distribution::new(
            names("X,Y,Z"),
            vec![2, 2, 2],
            vec![0.1, 0.0, 0.2, 0.0, 0.3, 0.0, 0.4, 0.0],
        )
        .unwrap();
        let a = d.adjustment_estimand("X", "Y", &set("Z")).unwrap();
        assert!((a.get(0, 0) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn independence_of_product_table() {
        let pa = [0.3, 0.7];
        let pb = [0.6, 0.4];
        let masses = pa.iter().flat_map(|a| pb.iter().map(move |b| a * b)).collect();
        let d = Distribution::new(names("A,B"), vec![2, 2], masses).unwrap();
        assert!(d.conditionally_independent(&set("A"), &set("B"), &set(""), 1e-15).unwrap());
        assert!(d.max_dependence(&set("A"), &set("A"), &set("")).is_err());
    }

    #[test]
    fn propensity_strata_merge_equal_scores() {
        let t = PropensityTable {
            z: set("Z"),
            z_arity: vec![4],
            entries: vec![Some(0.25), Some(0.5), Some(0.25 + 1e-14), None],
        };
        let (classes, n) = t.strata();
        assert_eq!(n, 2);
        assert_eq!(classes, vec![Some(0), Some(1), Some(0), None]);
    }

    #[test]
    fn propensity_needs_binary_treatment() {
        let d = Distribution::new(names("X,Z"), vec![3, 2], vec![1.0; 6]).unwrap();
        assert!(matches!(d.propensity("X", &set("Z")), Err(Error::NonBinaryTreatment(_))));
    }
}
