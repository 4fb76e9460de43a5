// SPDX-License-Identifier: Apache-2.0
//! The back-door criterion.
//!
//! A set `s` is G-admissible for the effect of `x` on `y` when it contains no
//! descendant of `x` and blocks every trail from `x` to `y` that starts with
//! an edge into `x`. Blocking is decided as d-separation in the graph with
//! `x`'s outgoing edges deleted.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{bit, bits, Dag, VarSet};
use crate::separation::{dsep, find_open_trail, Trail, PATHS_NODE_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdmissibilityVerdict {
    pub admissible: bool,
    pub violating_descendants: VarSet,
    pub backdoor_blocked: bool,
    /// An unblocked back-door trail; only searched for on graphs of at most
    /// [`PATHS_NODE_LIMIT`] nodes.
    #[serde(serialize_with = "ser_trail")]
    pub open_backdoor: Option<Trail>,
}

fn ser_trail<S: serde::Serializer>(t: &Option<Trail>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match t {
        Some(t) => s.serialize_some(&t.to_string()),
        None => s.serialize_none(),
    }
}

/// `g` with every edge out of `x` deleted.
pub fn back_door_graph(g: &Dag, x: &str) -> Result<Dag> {
    g.without_edges_from(x)
}

/// Precomputed back-door context for repeated admissibility tests of one
/// `(x, y)` pair.
pub(crate) struct BackDoor {
    bd: Dag,
    desc_x: u64,
    x: usize,
    y: usize,
}

impl BackDoor {
    pub(crate) fn new(g: &Dag, x: usize, y: usize) -> Self {
        BackDoor {
            bd: g.without_edges_from(g.name(x)).expect("x is a node"),
            desc_x: g.desc_mask(bit(x)),
            x,
            y,
        }
    }

    pub(crate) fn admissible(&self, s: u64) -> bool {
        s & self.desc_x == 0 && self.blocked(s)
    }

    fn blocked(&self, s: u64) -> bool {
        dsep(&self.bd, bit(self.x), bit(self.y), s)
    }
}

fn check_pair(g: &Dag, x: &str, y: &str, s: &VarSet) -> Result<(usize, usize, u64)> {
    let (xi, yi) = (g.idx(x)?, g.idx(y)?);
    if xi == yi {
        return Err(Error::InvalidQuery("x and y must differ".into()));
    }
    let sm = g.mask_of(s)?;
    if sm & (bit(xi) | bit(yi)) != 0 {
        return Err(Error::InvalidQuery(format!("{s} contains {x} or {y}")));
    }
    Ok((xi, yi, sm))
}

pub fn g_admissible(g: &Dag, x: &str, y: &str, s: &VarSet) -> Result<AdmissibilityVerdict> {
    let (xi, yi, sm) = check_pair(g, x, y, s)?;
    let ctx = BackDoor::new(g, xi, yi);
    let violating = g.set_of(sm & ctx.desc_x);
    let blocked = ctx.blocked(sm);
    let open_backdoor = if !blocked && g.len() <= PATHS_NODE_LIMIT {
        let x_set = g.set_of(bit(xi));
        let y_set = g.set_of(bit(yi));
        find_open_trail(&ctx.bd, &x_set, &y_set, s)?
            .map(|t| Trail::new(g, t.nodes().to_vec()))
            .transpose()?
    } else {
        None
    };
    Ok(AdmissibilityVerdict {
        admissible: violating.is_empty() && blocked,
        violating_descendants: violating,
        backdoor_blocked: blocked,
        open_backdoor,
    })
}

/// A minimal admissible subset of `s`, or `None` when `s` itself is not
/// admissible.
///
/// Members are dropped greedily from the lexicographically last one down,
/// re-testing after each drop, so earlier names survive when there is a
/// choice.
pub fn minimal_admissible_subset(g: &Dag, x: &str, y: &str, s: &VarSet) -> Result<Option<VarSet>> {
    let (xi, yi, sm) = check_pair(g, x, y, s)?;
    let ctx = BackDoor::new(g, xi, yi);
    if !ctx.admissible(sm) {
        return Ok(None);
    }
    Ok(Some(g.set_of(minimal_admissible_mask(&ctx, sm))))
}

/// Every inclusion-minimal admissible set, by exhaustive search over the
/// non-descendants of `x`. At most 20 candidate nodes are allowed.
pub fn minimal_admissible_sets(g: &Dag, x: &str, y: &str) -> Result<Vec<VarSet>> {
    let (xi, yi, _) = check_pair(g, x, y, &VarSet::new())?;
    let ctx = BackDoor::new(g, xi, yi);
    let pool: Vec<usize> = bits(g.all_mask() & !ctx.desc_x & !bit(yi)).collect();
    if pool.len() > 20 {
        return Err(Error::PartitionTooLarge(pool.len()));
    }
    let expand = |m: usize| bits(m as u64).fold(0u64, |acc, j| acc | bit(pool[j]));
    let k = pool.len();
    let mut admissible = vec![false; 1 << k];
    // some subset of m, m included, is admissible
    let mut covered = vec![false; 1 << k];
    for m in 0..1usize << k {
        admissible[m] = ctx.admissible(expand(m));
        covered[m] = admissible[m] || bits(m as u64).any(|j| covered[m & !(1 << j)]);
    }
    let mut out: Vec<VarSet> = (0..1usize << k)
        .filter(|&m| admissible[m] && bits(m as u64).all(|j| !covered[m & !(1 << j)]))
        .map(|m| g.set_of(expand(m)))
        .collect();
    out.sort();
    Ok(out)
}

pub(crate) fn minimal_admissible_mask(ctx: &BackDoor, s: u64) -> u64 {
    let mut current = s;
    'restart: loop {
        let mut members: Vec<usize> = bits(current).collect();
        members.reverse();
        for v in members {
            if ctx.admissible(current & !bit(v)) {
                current &= !bit(v);
                continue 'restart;
            }
        }
        return current;
    }
}
