// SPDX-License-Identifier: Apache-2.0
//! Causal diagrams: node names, variable sets, DAGs and their moral graphs.
//!
//! Nodes are kept in canonical (byte-lexicographic) order and addressed
//! internally by position, so every node set is a `u64` mask. This caps a
//! graph at 64 nodes.

mod parse;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use parse::parse_graph;

pub const MAX_NODES: usize = 64;

/// A node name: a nonempty run of ASCII letters, digits and underscores.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NodeId(String);

impl NodeId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if is_valid_name(&name) {
            Ok(NodeId(name))
        } else {
            Err(Error::InvalidNodeName(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_name_char)
}

impl TryFrom<String> for NodeId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        NodeId::new(s)
    }
}

impl From<NodeId> for String {
    fn from(n: NodeId) -> String {
        n.0
    }
}

impl FromStr for NodeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        NodeId::new(s.trim())
    }
}

impl std::ops::Deref for NodeId {
    type Target = str;
    fn deref(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An ordered set of node names.
///
/// Parses from a comma-separated list (`"W1, W2"`); the empty string is the
/// empty set.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarSet(BTreeSet<NodeId>);

impl VarSet {
    pub fn new() -> Self {
        VarSet(BTreeSet::new())
    }

    pub fn singleton(node: NodeId) -> Self {
        VarSet(BTreeSet::from([node]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    pub fn insert(&mut self, node: NodeId) -> bool {
        self.0.insert(node)
    }

    pub fn remove(&mut self, name: &str) -> bool {
        self.0.remove(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &NodeId> + '_ {
        self.0.iter()
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.difference(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    /// Comma-joined member names without braces, `""` for the empty set.
    pub fn to_csv(&self) -> String {
        self.names().join(",")
    }

    pub fn names(&self) -> Vec<&str> {
        self.0.iter().map(|n| n.as_str()).collect()
    }
}

impl FromStr for VarSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(NodeId::new)
            .collect()
    }
}

impl FromIterator<NodeId> for VarSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        VarSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a VarSet {
    type Item = &'a NodeId;
    type IntoIter = std::collections::btree_set::Iter<'a, NodeId>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl IntoIterator for VarSet {
    type Item = NodeId;
    type IntoIter = std::collections::btree_set::IntoIter<NodeId>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names().join(", "))
    }
}

pub(crate) fn bit(i: usize) -> u64 {
    1u64 << i
}

pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// A directed acyclic graph over named nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    names: Vec<NodeId>,
    parents: Vec<u64>,
    children: Vec<u64>,
}

impl Default for Dag {
    fn default() -> Self {
        Dag::empty()
    }
}

impl Dag {
    pub fn empty() -> Self {
        Dag {
            names: Vec::new(),
            parents: Vec::new(),
            children: Vec::new(),
        }
    }

    /// Builds a DAG from declared nodes and `(parent, child)` edges.
    ///
    /// Every edge endpoint must be declared. Repeated declarations are
    /// harmless; repeated edges, self-loops and cycles are errors.
    pub fn new<N, E>(nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator<Item = NodeId>,
        E: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let names: Vec<NodeId> = nodes.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if names.len() > MAX_NODES {
            return Err(Error::TooManyNodes(names.len()));
        }
        let n = names.len();
        let mut dag = Dag {
            names,
            parents: vec![0; n],
            children: vec![0; n],
        };
        for (p, c) in edges {
            let pi = dag.idx(&p)?;
            let ci = dag.idx(&c)?;
            if pi == ci {
                return Err(Error::SelfLoop(p));
            }
            if dag.children[pi] & bit(ci) != 0 {
                return Err(Error::DuplicateEdge(p, c));
            }
            dag.children[pi] |= bit(ci);
            dag.parents[ci] |= bit(pi);
        }
        if let Some(cycle) = dag.find_cycle() {
            return Err(Error::Cycle(cycle));
        }
        Ok(dag)
    }

    /// Builds a DAG whose node set is exactly the edge endpoints.
    pub fn from_edges<E>(edges: E) -> Result<Self>
    where
        E: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let edges: Vec<_> = edges.into_iter().collect();
        let nodes = edges.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect::<Vec<_>>();
        Dag::new(nodes, edges)
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.names
    }

    pub fn node_set(&self) -> VarSet {
        self.names.iter().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).is_ok()
    }

    /// All edges as `(parent, child)` in canonical order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (p, &ch) in self.children.iter().enumerate() {
            for c in bits(ch) {
                out.push((self.names[p].clone(), self.names[c].clone()));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(|m| m.count_ones() as usize).sum()
    }

    pub fn has_edge(&self, parent: &str, child: &str) -> bool {
        match (self.idx(parent), self.idx(child)) {
            (Ok(p), Ok(c)) => self.children[p] & bit(c) != 0,
            _ => false,
        }
    }

    pub fn parents(&self, node: &str) -> Result<VarSet> {
        Ok(self.set_of(self.parents[self.idx(node)?]))
    }

    pub fn children(&self, node: &str) -> Result<VarSet> {
        Ok(self.set_of(self.children[self.idx(node)?]))
    }

    /// Reflexive-transitive closure of `s` under the child relation.
    pub fn descendants(&self, s: &VarSet) -> Result<VarSet> {
        Ok(self.set_of(self.desc_mask(self.mask_of(s)?)))
    }

    /// Reflexive-transitive closure of `s` under the parent relation.
    pub fn ancestors(&self, s: &VarSet) -> Result<VarSet> {
        Ok(self.set_of(self.anc_mask(self.mask_of(s)?)))
    }

    /// The subgraph induced on `s` and all of its ancestors.
    pub fn ancestral_subgraph(&self, s: &VarSet) -> Result<Dag> {
        let keep = self.anc_mask(self.mask_of(s)?);
        Ok(self.induced(keep))
    }

    pub fn induced_subgraph(&self, s: &VarSet) -> Result<Dag> {
        Ok(self.induced(self.mask_of(s)?))
    }

    /// The moral graph: the skeleton plus an edge between every pair of
    /// nodes sharing a child.
    pub fn moralize(&self) -> UGraph {
        let n = self.len();
        let mut adj = vec![0u64; n];
        for v in 0..n {
            adj[v] |= self.parents[v] | self.children[v];
            let pa = self.parents[v];
            for p in bits(pa) {
                adj[p] |= pa & !bit(p);
            }
        }
        UGraph {
            names: self.names.clone(),
            adj,
        }
    }

    /// The graph with every edge leaving `node` deleted.
    pub fn without_edges_from(&self, node: &str) -> Result<Dag> {
        let i = self.idx(node)?;
        let mut g = self.clone();
        for c in bits(g.children[i]) {
            g.parents[c] &= !bit(i);
        }
        g.children[i] = 0;
        Ok(g)
    }

    /// A topological order, ties broken lexicographically.
    pub fn topological_order(&self) -> Vec<NodeId> {
        self.topo_indices()
            .into_iter()
            .map(|i| self.names[i].clone())
            .collect()
    }

    /// Serializes to the native line format; `parse_graph` reads it back.
    pub fn to_native(&self) -> String {
        let mut out = String::new();
        for n in &self.names {
            out.push_str("node ");
            out.push_str(n);
            out.push('\n');
        }
        for (p, c) in self.edges() {
            out.push_str(&format!("{p} -> {c}\n"));
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph {\n");
        for n in &self.names {
            out.push_str(&format!("  {n};\n"));
        }
        for (p, c) in self.edges() {
            out.push_str(&format!("  {p} -> {c};\n"));
        }
        out.push_str("}\n");
        out
    }

    pub(crate) fn idx(&self, name: &str) -> Result<usize> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(name))
            .map_err(|_| Error::UnknownNode(name.to_string()))
    }

    pub(crate) fn name(&self, i: usize) -> &NodeId {
        &self.names[i]
    }

    pub(crate) fn mask_of(&self, s: &VarSet) -> Result<u64> {
        s.iter().try_fold(0u64, |m, n| Ok(m | bit(self.idx(n)?)))
    }

    pub(crate) fn set_of(&self, mask: u64) -> VarSet {
        bits(mask).map(|i| self.names[i].clone()).collect()
    }

    pub(crate) fn all_mask(&self) -> u64 {
        if self.len() == 64 {
            u64::MAX
        } else {
            bit(self.len()) - 1
        }
    }

    pub(crate) fn parent_mask(&self, i: usize) -> u64 {
        self.parents[i]
    }

    pub(crate) fn child_mask(&self, i: usize) -> u64 {
        self.children[i]
    }

    pub(crate) fn desc_mask(&self, start: u64) -> u64 {
        closure(start, &self.children)
    }

    pub(crate) fn anc_mask(&self, start: u64) -> u64 {
        closure(start, &self.parents)
    }

    pub(crate) fn topo_indices(&self) -> Vec<usize> {
        let n = self.len();
        let mut placed = 0u64;
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let next = (0..n)
                .find(|&v| placed & bit(v) == 0 && self.parents[v] & !placed == 0)
                .expect("acyclic");
            placed |= bit(next);
            order.push(next);
        }
        order
    }

    fn induced(&self, keep: u64) -> Dag {
        let old: Vec<usize> = bits(keep).collect();
        let remap = |m: u64| -> u64 {
            old.iter()
                .enumerate()
                .filter(|&(_, &o)| m & bit(o) != 0)
                .fold(0, |acc, (j, _)| acc | bit(j))
        };
        Dag {
            names: old.iter().map(|&i| self.names[i].clone()).collect(),
            parents: old.iter().map(|&i| remap(self.parents[i])).collect(),
            children: old.iter().map(|&i| remap(self.children[i])).collect(),
        }
    }

    fn find_cycle(&self) -> Option<Vec<NodeId>> {
        // Peel sources; whatever survives lies on or downstream of a cycle,
        // and every survivor has a surviving parent.
        let n = self.len();
        let mut left = self.all_mask();
        loop {
            let sources = bits(left)
                .filter(|&v| self.parents[v] & left == 0)
                .fold(0u64, |m, v| m | bit(v));
            if sources == 0 {
                break;
            }
            left &= !sources;
        }
        if left == 0 {
            return None;
        }
        let mut walk = vec![left.trailing_zeros() as usize];
        let mut seen = vec![usize::MAX; n];
        seen[walk[0]] = 0;
        loop {
            let cur = *walk.last().unwrap();
            let p = (self.parents[cur] & left).trailing_zeros() as usize;
            if seen[p] != usize::MAX {
                let mut cycle: Vec<usize> = walk[seen[p]..].to_vec();
                cycle.reverse();
                let start = (0..cycle.len()).min_by_key(|&k| &self.names[cycle[k]]).unwrap();
                cycle.rotate_left(start);
                return Some(cycle.into_iter().map(|i| self.names[i].clone()).collect());
            }
            seen[p] = walk.len();
            walk.push(p);
        }
    }
}

fn closure(start: u64, step: &[u64]) -> u64 {
    let mut result = start;
    let mut frontier = start;
    while frontier != 0 {
        let next = bits(frontier).fold(0u64, |m, v| m | step[v]) & !result;
        result |= next;
        frontier = next;
    }
    result
}

impl FromStr for Dag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_graph(s)
    }
}

impl fmt::Display for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_native())
    }
}

/// An undirected graph over named nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UGraph {
    names: Vec<NodeId>,
    adj: Vec<u64>,
}

impl UGraph {
    pub fn nodes(&self) -> &[NodeId] {
        &self.names
    }

    /// Edges as `(a, b)` with `a < b`, canonical order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (a, &m) in self.adj.iter().enumerate() {
            for b in bits(m).filter(|&b| b > a) {
                out.push((self.names[a].clone(), self.names[b].clone()));
            }
        }
        out
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        match (self.idx(a), self.idx(b)) {
            (Ok(i), Ok(j)) => self.adj[i] & bit(j) != 0,
            _ => false,
        }
    }

    pub fn neighbors(&self, node: &str) -> Result<VarSet> {
        let i = self.idx(node)?;
        Ok(bits(self.adj[i]).map(|j| self.names[j].clone()).collect())
    }

    /// True iff every path between `a` and `b` passes through `removed`.
    pub fn separates(&self, a: &VarSet, b: &VarSet, removed: &VarSet) -> Result<bool> {
        let am = self.mask_of(a)?;
        let bm = self.mask_of(b)?;
        let sm = self.mask_of(removed)?;
        Ok(self.reach(am & !sm, sm) & bm == 0)
    }

    /// Nodes reachable from `from` without entering `blocked`.
    pub(crate) fn reach(&self, from: u64, blocked: u64) -> u64 {
        let mut seen = from;
        let mut frontier = from;
        while frontier != 0 {
            let next = bits(frontier).fold(0u64, |m, v| m | self.adj[v]) & !seen & !blocked;
            seen |= next;
            frontier = next;
        }
        seen
    }

    pub(crate) fn idx(&self, name: &str) -> Result<usize> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(name))
            .map_err(|_| Error::UnknownNode(name.to_string()))
    }

    pub(crate) fn mask_of(&self, s: &VarSet) -> Result<u64> {
        s.iter().try_fold(0u64, |m, n| Ok(m | bit(self.idx(n)?)))
    }
}

/// A random DAG on `n` nodes named `V00`, `V01`, ...; each pair is joined
/// with probability `edge_prob`, oriented along a random hidden order.
pub fn random_dag<R: Rng + ?Sized>(rng: &mut R, n: usize, edge_prob: f64) -> Dag {
    assert!(n <= MAX_NODES, "at most {MAX_NODES} nodes");
    let names: Vec<NodeId> = (0..n).map(|i| NodeId(format!("V{i:02}"))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(edge_prob) {
                edges.push((names[order[i]].clone(), names[order[j]].clone()));
            }
        }
    }
    Dag::new(names, edges).expect("edges follow a total order")
}
