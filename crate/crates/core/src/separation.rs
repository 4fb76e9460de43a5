// SPDX-License-Identifier: Apache-2.0
//! d-separation.
//!
//! Three backends answer the same question by different routes:
//!
//! - [`Backend::Paths`] enumerates every trail and applies the blocking
//!   rule literally. Exponential; limited to small graphs.
//! - [`Backend::Moral`] separates in the moralized ancestral graph.
//! - [`Backend::Reach`] runs a linear-time active-trail reachability sweep.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{bit, bits, Dag, NodeId, VarSet};

/// Node limit for [`Backend::Paths`].
pub const PATHS_NODE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Paths,
    Moral,
    #[default]
    Reach,
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paths" => Ok(Backend::Paths),
            "moral" => Ok(Backend::Moral),
            "reach" => Ok(Backend::Reach),
            other => Err(Error::InvalidQuery(format!("unknown backend {other:?}"))),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Paths => "paths",
            Backend::Moral => "moral",
            Backend::Reach => "reach",
        })
    }
}

/// A sequence of distinct nodes, consecutive ones adjacent in the DAG.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trail {
    nodes: Vec<NodeId>,
    /// `forward[i]` is true when the edge runs `nodes[i] -> nodes[i + 1]`.
    forward: Vec<bool>,
}

impl Trail {
    pub fn new(g: &Dag, nodes: Vec<NodeId>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidTrail("empty trail".into()));
        }
        for (i, n) in nodes.iter().enumerate() {
            g.idx(n)?;
            if nodes[..i].contains(n) {
                return Err(Error::InvalidTrail(format!("{n} repeats")));
            }
        }
        let forward = nodes
            .windows(2)
            .map(|w| {
                if g.has_edge(&w[0], &w[1]) {
                    Ok(true)
                } else if g.has_edge(&w[1], &w[0]) {
                    Ok(false)
                } else {
                    Err(Error::InvalidTrail(format!("{} and {} are not adjacent", w[0], w[1])))
                }
            })
            .collect::<Result<_>>()?;
        Ok(Trail { nodes, forward })
    }

    /// Parses `"X <- V1 -> V2 -> Y"` against `g`; the arrows must match
    /// the graph's edges.
    pub fn parse(g: &Dag, text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut arrows = Vec::new();
        for (i, tok) in text.split_whitespace().enumerate() {
            if i % 2 == 0 {
                nodes.push(NodeId::new(tok)?);
            } else {
                arrows.push(match tok {
                    "->" => true,
                    "<-" => false,
                    other => return Err(Error::InvalidTrail(format!("expected -> or <-, found {other}"))),
                });
            }
        }
        let t = Trail::new(g, nodes)?;
        if t.forward.len() != arrows.len() || t.forward != arrows {
            return Err(Error::InvalidTrail(format!("arrows in {text:?} do not match the graph")));
        }
        Ok(t)
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True when the edge between positions `i` and `i + 1` points forward.
    pub fn points_forward(&self, i: usize) -> bool {
        self.forward[i]
    }

    /// True when interior position `i` has both trail edges pointing into it.
    pub fn is_collider_at(&self, i: usize) -> bool {
        i > 0 && i + 1 < self.nodes.len() && self.forward[i - 1] && !self.forward[i]
    }

    /// A trail whose first edge points into its first node.
    pub fn is_back_door(&self) -> bool {
        self.forward.first() == Some(&false)
    }
}

impl fmt::Display for Trail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(if self.forward[i - 1] { " -> " } else { " <- " })?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

/// Does `s` block trail `t` in `g`?
///
/// Blocked iff some interior non-collider lies in `s`, or some collider lies
/// outside `s` with no descendant in `s`. The trail's endpoints must lie
/// outside `s`.
pub fn is_path_blocked(g: &Dag, t: &Trail, s: &VarSet) -> Result<bool> {
    // revalidate: the trail may come from another graph
    let t = Trail::new(g, t.nodes.clone())?;
    for end in [t.nodes.first(), t.nodes.last()].into_iter().flatten() {
        if s.contains(end) {
            return Err(Error::InvalidTrail(format!("endpoint {end} is in the conditioning set")));
        }
    }
    let s_mask = g.mask_of(s)?;
    for i in 1..t.len().saturating_sub(1) {
        let v = &t.nodes[i];
        if t.is_collider_at(i) {
            let desc = g.descendants(&VarSet::singleton(v.clone()))?;
            if desc.is_disjoint(s) {
                return Ok(true);
            }
        } else if s_mask & bit(g.idx(v)?) != 0 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// A validated d-separation question: is `a` separated from `b` by `s`?
#[derive(Debug, Clone)]
pub struct SeparationQuery<'g> {
    g: &'g Dag,
    a: VarSet,
    b: VarSet,
    s: VarSet,
}

impl<'g> SeparationQuery<'g> {
    /// `a` and `b` must be nonempty and `a`, `b`, `s` pairwise disjoint.
    pub fn new(g: &'g Dag, a: VarSet, b: VarSet, s: VarSet) -> Result<Self> {
        for set in [&a, &b, &s] {
            g.mask_of(set)?;
        }
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidQuery("both separated sets must be nonempty".into()));
        }
        for (x, y, what) in [(&a, &b, "a and b"), (&a, &s, "a and s"), (&b, &s, "b and s")] {
            let common = x.intersection(y);
            if !common.is_empty() {
                return Err(Error::InvalidQuery(format!("{what} overlap in {common}")));
            }
        }
        Ok(SeparationQuery { g, a, b, s })
    }

    pub fn graph(&self) -> &'g Dag {
        self.g
    }

    pub fn a(&self) -> &VarSet {
        &self.a
    }

    pub fn b(&self) -> &VarSet {
        &self.b
    }

    pub fn s(&self) -> &VarSet {
        &self.s
    }

    fn masks(&self) -> (u64, u64, u64) {
        let m = |v: &VarSet| self.g.mask_of(v).expect("validated");
        (m(&self.a), m(&self.b), m(&self.s))
    }
}

pub fn d_separated(q: &SeparationQuery<'_>, backend: Backend) -> Result<bool> {
    let (a, b, s) = q.masks();
    match backend {
        Backend::Reach => Ok(reach_separated(q.g, a, b, s)),
        Backend::Moral => Ok(moral_separated(q.g, a, b, s)),
        Backend::Paths => {
            if q.g.len() > PATHS_NODE_LIMIT {
                return Err(Error::BackendLimit {
                    nodes: q.g.len(),
                    limit: PATHS_NODE_LIMIT,
                });
            }
            Ok(paths_separated(q.g, a, b, s))
        }
    }
}

/// Separation in the moral graph of the ancestral set of `a ∪ b ∪ s`,
/// with `s` deleted.
pub fn moral_separation_test(q: &SeparationQuery<'_>) -> bool {
    let all = q.a.union(&q.b).union(&q.s);
    let moral = q.g.ancestral_subgraph(&all).expect("validated").moralize();
    moral.separates(&q.a, &q.b, &q.s).expect("validated")
}

/// Mask-level d-separation used by the other modules.
///
/// Permissive where the public query is strict: members of `s` are dropped
/// from `a` and `b` (conditioning on a variable makes it trivially
/// independent), an empty side is separated vacuously, and a node shared
/// by `a` and `b` is never separated from itself.
pub(crate) fn dsep(g: &Dag, a: u64, b: u64, s: u64) -> bool {
    let (a, b) = (a & !s, b & !s);
    if a == 0 || b == 0 {
        return true;
    }
    if a & b != 0 {
        return false;
    }
    reach_separated(g, a, b, s)
}

fn reach_separated(g: &Dag, a: u64, b: u64, s: u64) -> bool {
    active_reach(g, a, s) & b == 0
}

/// Nodes connected to `from` by a trail active given `s`.
///
/// Traversal states are (node, direction of arrival); "up" means reached
/// from a child (or a source), "down" from a parent.
pub(crate) fn active_reach(g: &Dag, from: u64, s: u64) -> u64 {
    let anc_s = g.anc_mask(s);
    let mut seen_up = from & !s;
    let mut seen_down = 0u64;
    let (mut up, mut down) = (seen_up, 0u64);
    while up | down != 0 {
        let mut next_up = 0u64;
        let mut next_down = 0u64;
        for v in bits(up & !s) {
            next_up |= g.parent_mask(v);
            next_down |= g.child_mask(v);
        }
        for v in bits(down) {
            if s & bit(v) == 0 {
                next_down |= g.child_mask(v);
            }
            if anc_s & bit(v) != 0 {
                next_up |= g.parent_mask(v);
            }
        }
        up = next_up & !seen_up;
        down = next_down & !seen_down;
        seen_up |= up;
        seen_down |= down;
    }
    (seen_up | seen_down) & !s
}

fn moral_separated(g: &Dag, a: u64, b: u64, s: u64) -> bool {
    // moral graph of the ancestral set, restricted by mask
    let keep = g.anc_mask(a | b | s);
    let mut adj = vec![0u64; g.len()];
    for v in bits(keep) {
        let pa = g.parent_mask(v);
        adj[v] |= (pa | g.child_mask(v)) & keep;
        for p in bits(pa) {
            adj[p] |= pa & !bit(p);
        }
    }
    let mut seen = a & !s;
    let mut frontier = seen;
    while frontier != 0 {
        let next = bits(frontier).fold(0u64, |m, v| m | adj[v]) & !seen & !s;
        seen |= next;
        frontier = next;
    }
    seen & b == 0
}

/// One trail reduced to what blocking depends on.
#[derive(Debug, Clone, Copy)]
struct TrailSig {
    interior: u64,
    non_colliders: u64,
    colliders: u64,
}

/// Every trail of a graph, grouped by endpoint pair.
///
/// Built once per graph, after which each query is a table scan; suited to
/// many queries against one small graph.
pub struct TrailTable<'g> {
    g: &'g Dag,
    by_pair: Vec<Vec<TrailSig>>,
}

impl<'g> TrailTable<'g> {
    pub fn new(g: &'g Dag) -> Result<Self> {
        let n = g.len();
        if n > PATHS_NODE_LIMIT {
            return Err(Error::BackendLimit {
                nodes: n,
                limit: PATHS_NODE_LIMIT,
            });
        }
        let mut by_pair = vec![Vec::new(); n * n];
        let mut stack = Vec::with_capacity(n);
        for start in 0..n {
            stack.clear();
            stack.push(start);
            collect_trails(g, &mut stack, bit(start), &mut by_pair);
        }
        Ok(TrailTable { g, by_pair })
    }

    pub fn d_separated(&self, a: &VarSet, b: &VarSet, s: &VarSet) -> Result<bool> {
        let q = SeparationQuery::new(self.g, a.clone(), b.clone(), s.clone())?;
        let (a, b, s) = q.masks();
        Ok(self.separated(a, b, s))
    }

    fn separated(&self, a: u64, b: u64, s: u64) -> bool {
        let n = self.g.len();
        let anc_s = self.g.anc_mask(s);
        // A trail with another endpoint-set member in its interior has a
        // shorter sub-trail that is open whenever it is, so those are skipped.
        let ends = a | b;
        for u in bits(a) {
            for v in bits(b) {
                for t in &self.by_pair[u * n + v] {
                    if t.interior & ends != 0 {
                        continue;
                    }
                    let open = t.non_colliders & s == 0 && t.colliders & !anc_s == 0;
                    if open {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn collect_trails(g: &Dag, stack: &mut Vec<usize>, on: u64, out: &mut [Vec<TrailSig>]) {
    let n = g.len();
    let last = *stack.last().unwrap();
    let nbrs = (g.parent_mask(last) | g.child_mask(last)) & !on;
    for next in bits(nbrs) {
        stack.push(next);
        let sig = classify(g, stack);
        out[stack[0] * n + next].push(sig);
        collect_trails(g, stack, on | bit(next), out);
        stack.pop();
    }
}

fn classify(g: &Dag, trail: &[usize]) -> TrailSig {
    let mut sig = TrailSig {
        interior: 0,
        non_colliders: 0,
        colliders: 0,
    };
    for w in trail.windows(3) {
        let (prev, v, next) = (w[0], w[1], w[2]);
        sig.interior |= bit(v);
        let into_from_prev = g.child_mask(prev) & bit(v) != 0;
        let into_from_next = g.child_mask(next) & bit(v) != 0;
        if into_from_prev && into_from_next {
            sig.colliders |= bit(v);
        } else {
            sig.non_colliders |= bit(v);
        }
    }
    sig
}

/// Depth-first enumeration of simple trails out of `a`, abandoning a trail
/// as soon as an interior node blocks it.
fn paths_separated(g: &Dag, a: u64, b: u64, s: u64) -> bool {
    let anc_s = g.anc_mask(s);
    bits(a).all(|start| search_open(g, &mut vec![start], bit(start), b, s, anc_s).is_none())
}

/// Some trail between `a` and `b` left open by `s`, by exhaustive search.
pub fn find_open_trail(g: &Dag, a: &VarSet, b: &VarSet, s: &VarSet) -> Result<Option<Trail>> {
    let q = SeparationQuery::new(g, a.clone(), b.clone(), s.clone())?;
    if g.len() > PATHS_NODE_LIMIT {
        return Err(Error::BackendLimit {
            nodes: g.len(),
            limit: PATHS_NODE_LIMIT,
        });
    }
    let (am, bm, sm) = q.masks();
    let anc_s = g.anc_mask(sm);
    for start in bits(am) {
        let mut stack = vec![start];
        if let Some(found) = search_open(g, &mut stack, bit(start), bm, sm, anc_s) {
            let nodes = found.into_iter().map(|i| g.name(i).clone()).collect();
            return Trail::new(g, nodes).map(Some);
        }
    }
    Ok(None)
}

fn search_open(g: &Dag, stack: &mut Vec<usize>, on: u64, b: u64, s: u64, anc_s: u64) -> Option<Vec<usize>> {
    let last = *stack.last().unwrap();
    for next in bits((g.parent_mask(last) | g.child_mask(last)) & !on) {
        if stack.len() >= 2 {
            let prev = stack[stack.len() - 2];
            let collider = g.child_mask(prev) & bit(last) != 0 && g.child_mask(next) & bit(last) != 0;
            let blocked = if collider { anc_s & bit(last) == 0 } else { s & bit(last) != 0 };
            if blocked {
                continue;
            }
        }
        stack.push(next);
        if b & bit(next) != 0 {
            return Some(stack.clone());
        }
        if let Some(found) = search_open(g, stack, on | bit(next), b, s, anc_s) {
            return Some(found);
        }
        stack.pop();
    }
    None
}

/// All minimal sets separating `x` from `y`, by exhaustive search over
/// subsets of the remaining nodes. Graphs are limited to 20 nodes.
pub fn minimal_separators(g: &Dag, x: &str, y: &str) -> Result<Vec<VarSet>> {
    let (xi, yi) = (g.idx(x)?, g.idx(y)?);
    if xi == yi {
        return Err(Error::InvalidQuery("x and y must differ".into()));
    }
    if g.len() > 20 {
        return Err(Error::InvalidQuery(format!(
            "minimal separator enumeration is limited to 20 nodes, graph has {}",
            g.len()
        )));
    }
    let others: Vec<usize> = (0..g.len()).filter(|&i| i != xi && i != yi).collect();
    let k = others.len();
    let expand = |m: usize| -> u64 {
        bits(m as u64).fold(0u64, |acc, j| acc | bit(others[j]))
    };
    // has_sep[m]: some subset of m (m included) separates
    let mut separates = vec![false; 1 << k];
    let mut has_sep = vec![false; 1 << k];
    for m in 0..1usize << k {
        separates[m] = reach_separated(g, bit(xi), bit(yi), expand(m));
        has_sep[m] = separates[m] || bits(m as u64).any(|j| has_sep[m & !(1 << j)]);
    }
    let mut out: Vec<VarSet> = (0..1usize << k)
        .filter(|&m| separates[m] && bits(m as u64).all(|j| !has_sep[m & !(1 << j)]))
        .map(|m| g.set_of(expand(m)))
        .collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn set(s: &str) -> VarSet {
        s.parse().unwrap()
    }

    fn sep(g: &Dag, a: &str, b: &str, s: &str) -> [bool; 3] {
        let q = SeparationQuery::new(g, set(a), set(b), set(s)).unwrap();
        [Backend::Paths, Backend::Moral, Backend::Reach].map(|be| d_separated(&q, be).unwrap())
    }

    #[test]
    fn blocking_clauses() {
        let g1 = fixtures::side_parents();
        let t = Trail::parse(&g1, "X <- V1 -> V2 -> Y").unwrap();
        assert!(t.is_back_door());
        assert!(is_path_blocked(&g1, &t, &set("V1")).unwrap());
        assert!(!is_path_blocked(&g1, &t, &set("")).unwrap());
        let direct = Trail::parse(&g1, "X -> Y").unwrap();
        assert!(!is_path_blocked(&g1, &direct, &set("")).unwrap());

        let g2 = fixtures::instruments();
        let t = Trail::parse(&g2, "W2 -> W1 -> X <- V1 -> V2 -> Y").unwrap();
        assert!(t.is_collider_at(2));
        assert!(!is_path_blocked(&g2, &t, &set("X,W3")).unwrap());
        assert!(is_path_blocked(&g2, &t, &set("")).unwrap());
    }

    #[test]
    fn collider_opened_by_descendant() {
        let g: Dag = "A -> C\nB -> C\nC -> D".parse().unwrap();
        let t = Trail::parse(&g, "A -> C <- B").unwrap();
        assert!(is_path_blocked(&g, &t, &set("")).unwrap());
        assert!(!is_path_blocked(&g, &t, &set("D")).unwrap());
        assert_eq!(sep(&g, "A", "B", "D"), [false; 3]);
        assert_eq!(sep(&g, "A", "B", ""), [true; 3]);
    }

    #[test]
    fn invalid_trails() {
        let g = fixtures::side_parents();
        assert!(Trail::parse(&g, "X -> V1").is_err());
        assert!(Trail::parse(&g, "W1 -> Y").is_err());
        assert!(Trail::new(&g, vec![]).is_err());
        let x = NodeId::new("X").unwrap();
        let y = NodeId::new("Y").unwrap();
        assert!(Trail::new(&g, vec![x.clone(), y, x]).is_err());
        let t = Trail::parse(&g, "X -> Y").unwrap();
        assert!(is_path_blocked(&g, &t, &set("X")).is_err());
    }

    #[test]
    fn fixture_separations() {
        let g1 = fixtures::side_parents();
        assert_eq!(sep(&g1, "X", "W1", "W2"), [false; 3]);
        assert_eq!(sep(&g1, "X", "V2", "V1"), [true; 3]);
        let g2 = fixtures::instruments();
        assert_eq!(sep(&g2, "X", "W2", "W1"), [true; 3]);
        assert_eq!(sep(&g2, "Y", "W2", "X"), [false; 3]);
        let q = SeparationQuery::new(&g2, set("Y"), set("W2"), set("X")).unwrap();
        assert!(!moral_separation_test(&q));
        let iso: Dag = "node A B".parse().unwrap();
        assert_eq!(sep(&iso, "A", "B", ""), [true; 3]);
    }

    #[test]
    fn query_validation() {
        let g = fixtures::side_parents();
        assert!(SeparationQuery::new(&g, set("X"), set("X"), set("")).is_err());
        assert!(SeparationQuery::new(&g, set("X"), set("Y"), set("Y")).is_err());
        assert!(SeparationQuery::new(&g, set(""), set("Y"), set("")).is_err());
        assert!(SeparationQuery::new(&g, set("X"), set("Q"), set("")).is_err());
    }

    #[test]
    fn paths_backend_is_gated() {
        let names: Vec<String> = (0..17).map(|i| format!("N{i:02}")).collect();
        let text = names.windows(2).map(|w| format!("{} -> {}\n", w[0], w[1])).collect::<String>();
        let g: Dag = text.parse().unwrap();
        let q = SeparationQuery::new(&g, set("N00"), set("N16"), set("")).unwrap();
        assert!(matches!(d_separated(&q, Backend::Paths), Err(Error::BackendLimit { .. })));
        assert!(!d_separated(&q, Backend::Reach).unwrap());
    }

    #[test]
    fn open_trail_witness() {
        let g = fixtures::side_parents();
        let w = find_open_trail(&g, &set("X"), &set("Y"), &set("W1")).unwrap().unwrap();
        assert!(!is_path_blocked(&g, &w, &set("W1")).unwrap());
        assert_eq!(find_open_trail(&g, &set("X"), &set("V2"), &set("V1")).unwrap(), None);
    }

    #[test]
    fn minimal_separators_on_instruments() {
        let g = fixtures::instruments();
        // X and W2 are separated exactly by W1
        assert_eq!(minimal_separators(&g, "X", "W2").unwrap(), vec![set("W1")]);
        // X and V2: V1 blocks the fork; nothing else does
        assert_eq!(minimal_separators(&g, "X", "V2").unwrap(), vec![set("V1")]);
    }
}
