// SPDX-License-Identifier: Apache-2.0
//! Markov boundaries of a treatment node within a covariate set.
//!
//! The boundary `Sm` of `x` relative to `s` is the unique minimal subset of
//! `s` with `x ⊥ s \ Sm | Sm`. It is built by repeatedly deleting any member
//! that is d-separated from `x` by the other remaining members; uniqueness
//! makes the deletion order irrelevant.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{bit, bits, Dag, NodeId, VarSet};
use crate::separation::dsep;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Removal {
    pub node: NodeId,
    /// The remaining members that separated `node` from the treatment.
    pub given: VarSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundaryResult {
    pub boundary: VarSet,
    pub removed: Vec<Removal>,
}

/// Markov boundary of `x` within `s`, deleting candidates in lexicographic
/// order and restarting after each deletion.
pub fn markov_boundary(g: &Dag, x: &str, s: &VarSet) -> Result<BoundaryResult> {
    let order: Vec<NodeId> = s.iter().cloned().collect();
    markov_boundary_in_order(g, x, s, &order)
}

/// As [`markov_boundary`], trying candidates in the given order, which must
/// list every member of `s` exactly once.
pub fn markov_boundary_in_order(g: &Dag, x: &str, s: &VarSet, order: &[NodeId]) -> Result<BoundaryResult> {
    let xi = g.idx(x)?;
    let s_mask = g.mask_of(s)?;
    if s_mask & bit(xi) != 0 {
        return Err(Error::InvalidQuery(format!("{x} is a member of the set {s}")));
    }
    let order: Vec<usize> = order.iter().map(|n| g.idx(n)).collect::<Result<_>>()?;
    let order_mask = order.iter().fold(0u64, |m, &i| m | bit(i));
    if order.len() != s.len() || order_mask != s_mask {
        return Err(Error::InvalidQuery("removal order must be a permutation of the set".into()));
    }
    let mut current = s_mask;
    let mut removed = Vec::new();
    'restart: loop {
        for &v in &order {
            if current & bit(v) == 0 {
                continue;
            }
            let rest = current & !bit(v);
            if dsep(g, bit(xi), bit(v), rest) {
                removed.push(Removal {
                    node: g.name(v).clone(),
                    given: g.set_of(rest),
                });
                current = rest;
                continue 'restart;
            }
        }
        break;
    }
    Ok(BoundaryResult {
        boundary: g.set_of(current),
        removed,
    })
}

pub(crate) fn boundary_mask(g: &Dag, x: usize, s: u64) -> u64 {
    let mut current = s;
    'restart: loop {
        for v in bits(current) {
            let rest = current & !bit(v);
            if dsep(g, bit(x), bit(v), rest) {
                current = rest;
                continue 'restart;
            }
        }
        return current;
    }
}

/// Shrinks `s` by repeatedly discarding a member that is d-separated either
/// from `x` by the remaining members, or from `y` by `x` and the remaining
/// members. Each discard leaves the adjustment estimand unchanged, with or
/// without descendants of `x` in `s`.
///
/// Members are tried in lexicographic order, restarting after each discard.
/// Unlike the plain boundary the result can depend on that order.
pub fn reduced_markov_boundary(g: &Dag, x: &str, y: &str, s: &VarSet) -> Result<VarSet> {
    let (xi, yi) = (g.idx(x)?, g.idx(y)?);
    if xi == yi {
        return Err(Error::InvalidQuery("x and y must differ".into()));
    }
    let s_mask = g.mask_of(s)?;
    if s_mask & (bit(xi) | bit(yi)) != 0 {
        return Err(Error::InvalidQuery(format!("{s} contains {x} or {y}")));
    }
    Ok(g.set_of(reduced_mask(g, xi, yi, s_mask)))
}

pub(crate) fn reduced_mask(g: &Dag, x: usize, y: usize, s: u64) -> u64 {
    let mut current = s;
    'restart: loop {
        for v in bits(current) {
            let rest = current & !bit(v);
            if dsep(g, bit(x), bit(v), rest) || dsep(g, bit(v), bit(y), rest | bit(x)) {
                current = rest;
                continue 'restart;
            }
        }
        return current;
    }
}
