// SPDX-License-Identifier: Apache-2.0
//! Confounding equivalence of covariate sets.
//!
//! Sets `t` and `z` (containing no descendant of the treatment `x`) are
//! c-equivalent relative to `(x, y)` exactly when their Markov boundaries
//! around `x` coincide, or both satisfy the back-door criterion.
//! [`c_equivalent`] decides this in polynomial time. The other entry points
//! are the purely statistical tests that certify or characterize the same
//! relation, and the step-wise chains that connect equivalent sets one
//! variable at a time.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::admissibility::BackDoor;
use crate::boundary::{boundary_mask, reduced_mask};
use crate::error::{Error, Result};
use crate::graph::{bit, bits, Dag, VarSet};
use crate::separation::dsep;

/// Largest set the set-subset partition search accepts.
pub const PARTITION_LIMIT: usize = 20;
/// Visited-state cap for the admissible-set search inside chains.
pub const CHAIN_STATE_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    BothAdmissible,
    EqualBoundaries,
    NotEquivalent,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reason::BothAdmissible => "both_admissible",
            Reason::EqualBoundaries => "equal_boundaries",
            Reason::NotEquivalent => "not_equivalent",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CequivVerdict {
    pub equivalent: bool,
    pub reason: Reason,
    pub t_boundary: VarSet,
    pub z_boundary: VarSet,
    pub t_admissible: bool,
    pub z_admissible: bool,
}

/// Which of the two mirrored independence conditions certify `t ≈ z`.
///
/// `Forward`: `x ⊥ z | t` and `y ⊥ t | z, x`. `Backward`: the same with
/// `t` and `z` swapped. `Neither` does not imply non-equivalence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sufficiency {
    #[serde(rename = "c_star")]
    Forward,
    #[serde(rename = "c_star_star")]
    Backward,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "neither")]
    Neither,
}

impl Sufficiency {
    pub fn holds(self) -> bool {
        self != Sufficiency::Neither
    }
}

impl fmt::Display for Sufficiency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sufficiency::Forward => "c_star",
            Sufficiency::Backward => "c_star_star",
            Sufficiency::Both => "both",
            Sufficiency::Neither => "neither",
        })
    }
}

/// A split of `s` into `s1 ⊥ x | t` and `s2 ⊥ y | s1, x, t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub s1: VarSet,
    pub s2: VarSet,
}

/// Why one step of a chain preserves the adjustment estimand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum License {
    /// The changed variable is separated from `x` by the smaller set.
    #[serde(rename = "condition_i")]
    SeparatedFromTreatment,
    /// The changed variable is separated from `y` by the smaller set and `x`.
    #[serde(rename = "condition_ii")]
    SeparatedFromOutcome,
    /// Neither separation holds, but the two Markov boundaries coincide.
    #[serde(rename = "boundary_reduction")]
    BoundaryReduction,
    /// Neither separation holds; both sets are back-door admissible.
    #[serde(rename = "both_admissible")]
    BothAdmissible,
}

impl fmt::Display for License {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            License::SeparatedFromTreatment => "condition_i",
            License::SeparatedFromOutcome => "condition_ii",
            License::BoundaryReduction => "boundary_reduction",
            License::BothAdmissible => "both_admissible",
        })
    }
}

/// `steps[0] = t`, last step `= z`; neighbours differ by one variable and
/// `licenses[i]` justifies `steps[i] ≈ steps[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Chain {
    pub steps: Vec<VarSet>,
    pub licenses: Vec<License>,
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                write!(f, " ≈ ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// The independences that admissibility of both sets forces on the data.
///
/// With `U = {Tm ∪ Zm}m`: `holds_given_z_boundary` is `U \ Zm ⊥ y | x, Zm`
/// and `holds_given_t_boundary` is `U \ Tm ⊥ y | x, Tm`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImplicationReport {
    pub t_boundary: VarSet,
    pub z_boundary: VarSet,
    pub union_boundary: VarSet,
    pub holds_given_z_boundary: bool,
    pub holds_given_t_boundary: bool,
}

/// Resolved `(x, y)` and set masks shared by the entry points.
struct Ctx<'g> {
    g: &'g Dag,
    x: usize,
    y: usize,
}

impl<'g> Ctx<'g> {
    fn new(g: &'g Dag, x: &str, y: &str) -> Result<Self> {
        let (xi, yi) = (g.idx(x)?, g.idx(y)?);
        if xi == yi {
            return Err(Error::InvalidQuery("x and y must differ".into()));
        }
        Ok(Ctx { g, x: xi, y: yi })
    }

    fn set(&self, name: &'static str, s: &VarSet) -> Result<u64> {
        let m = self.g.mask_of(s)?;
        if m & (bit(self.x) | bit(self.y)) != 0 {
            return Err(Error::InvalidQuery(format!(
                "{name} = {s} contains {} or {}",
                self.g.name(self.x),
                self.g.name(self.y)
            )));
        }
        Ok(m)
    }

    fn no_descendants(&self, name: &'static str, s: &VarSet) -> Result<u64> {
        let m = self.set(name, s)?;
        let bad = m & self.g.desc_mask(bit(self.x));
        if bad != 0 {
            return Err(Error::DescendantOfTreatment {
                set: name,
                treatment: self.g.name(self.x).clone(),
                nodes: self.g.set_of(bad),
            });
        }
        Ok(m)
    }

    fn sufficiency(&self, t: u64, z: u64) -> Sufficiency {
        let (g, x, y) = (self.g, bit(self.x), bit(self.y));
        let forward = dsep(g, z, x, t) && dsep(g, t, y, z | x);
        let backward = dsep(g, t, x, z) && dsep(g, z, y, t | x);
        match (forward, backward) {
            (true, true) => Sufficiency::Both,
            (true, false) => Sufficiency::Forward,
            (false, true) => Sufficiency::Backward,
            (false, false) => Sufficiency::Neither,
        }
    }

    fn partition(&self, t: u64, s: u64) -> Option<(u64, u64)> {
        let members: Vec<usize> = bits(s).collect();
        let (g, x, y) = (self.g, bit(self.x), bit(self.y));
        (0..1u64 << members.len()).find_map(|m| {
            let s1 = bits(m).fold(0u64, |acc, j| acc | bit(members[j]));
            let s2 = s & !s1;
            (dsep(g, s1, x, t) && dsep(g, s2, y, s1 | x | t)).then_some((s1, s2))
        })
    }
}

/// The pairwise independence test: a sufficient, not necessary, condition.
///
/// Members shared by `t` and `z` are conditioned on and so drop out of the
/// separated side.
pub fn pairwise_sufficient(g: &Dag, x: &str, y: &str, t: &VarSet, z: &VarSet) -> Result<Sufficiency> {
    let c = Ctx::new(g, x, y)?;
    let (tm, zm) = (c.set("t", t)?, c.set("z", z)?);
    Ok(c.sufficiency(tm, zm))
}

/// Decides c-equivalence: equal Markov boundaries, or both sets admissible.
///
/// Both sets must be free of descendants of `x`; the decision is then
/// necessary as well as sufficient.
pub fn c_equivalent(g: &Dag, x: &str, y: &str, t: &VarSet, z: &VarSet) -> Result<CequivVerdict> {
    let c = Ctx::new(g, x, y)?;
    let (tm, zm) = (c.no_descendants("t", t)?, c.no_descendants("z", z)?);
    let bd = BackDoor::new(g, c.x, c.y);
    Ok(verdict(g, &bd, boundary_mask(g, c.x, tm), boundary_mask(g, c.x, zm), tm, zm))
}

/// Like [`c_equivalent`] but compares boundaries after dropping members
/// separated from `y` given `x`, and accepts descendants of `x`. Only a
/// positive answer is meaningful here.
pub fn c_equivalent_reduced(g: &Dag, x: &str, y: &str, t: &VarSet, z: &VarSet) -> Result<CequivVerdict> {
    let c = Ctx::new(g, x, y)?;
    let (tm, zm) = (c.set("t", t)?, c.set("z", z)?);
    let bd = BackDoor::new(g, c.x, c.y);
    Ok(verdict(
        g,
        &bd,
        reduced_mask(g, c.x, c.y, tm),
        reduced_mask(g, c.x, c.y, zm),
        tm,
        zm,
    ))
}

fn verdict(g: &Dag, bd: &BackDoor, t_bound: u64, z_bound: u64, t: u64, z: u64) -> CequivVerdict {
    let (t_adm, z_adm) = (bd.admissible(t), bd.admissible(z));
    let reason = if t_bound == z_bound {
        Reason::EqualBoundaries
    } else if t_adm && z_adm {
        Reason::BothAdmissible
    } else {
        Reason::NotEquivalent
    };
    CequivVerdict {
        equivalent: reason != Reason::NotEquivalent,
        reason,
        t_boundary: g.set_of(t_bound),
        z_boundary: g.set_of(z_bound),
        t_admissible: t_adm,
        z_admissible: z_adm,
    }
}

/// Mask-level c-equivalence for sweeps over many set pairs of one graph.
pub struct EquivalenceTester<'g> {
    g: &'g Dag,
    x: usize,
    bd: BackDoor,
    forbidden: u64,
}

impl<'g> EquivalenceTester<'g> {
    pub fn new(g: &'g Dag, x: &str, y: &str) -> Result<Self> {
        let c = Ctx::new(g, x, y)?;
        Ok(EquivalenceTester {
            g,
            x: c.x,
            bd: BackDoor::new(g, c.x, c.y),
            forbidden: g.desc_mask(bit(c.x)) | bit(c.y),
        })
    }

    /// Nodes allowed in covariate sets: non-descendants of `x` other than `y`.
    pub fn candidates(&self) -> VarSet {
        self.g.set_of(self.g.all_mask() & !self.forbidden)
    }

    pub fn boundary(&self, s: &VarSet) -> Result<VarSet> {
        Ok(self.g.set_of(boundary_mask(self.g, self.x, self.checked(s)?)))
    }

    pub fn admissible(&self, s: &VarSet) -> Result<bool> {
        Ok(self.bd.admissible(self.checked(s)?))
    }

    pub fn equivalent(&self, t: &VarSet, z: &VarSet) -> Result<bool> {
        let (t, z) = (self.checked(t)?, self.checked(z)?);
        Ok(boundary_mask(self.g, self.x, t) == boundary_mask(self.g, self.x, z)
            || (self.bd.admissible(t) && self.bd.admissible(z)))
    }

    fn checked(&self, s: &VarSet) -> Result<u64> {
        let m = self.g.mask_of(s)?;
        if m & self.forbidden != 0 {
            return Err(Error::InvalidQuery(format!(
                "{s} contains {} or one of its descendants",
                self.g.name(self.x)
            )));
        }
        Ok(m)
    }
}

/// Searches for a split of `s` certifying `t ≈ t ∪ s`, trying the `2^|s|`
/// candidate `s1` sets in binary-counter order over `s`'s sorted members.
///
/// `None` only means the test does not apply; `t` and `t ∪ s` may still be
/// equivalent.
pub fn set_subset_equivalent(g: &Dag, x: &str, y: &str, t: &VarSet, s: &VarSet) -> Result<Option<Partition>> {
    let c = Ctx::new(g, x, y)?;
    let (tm, sm) = (c.set("t", t)?, c.set("s", s)?);
    if tm & sm != 0 {
        return Err(Error::InvalidQuery(format!("t and s overlap in {}", g.set_of(tm & sm))));
    }
    if s.len() > PARTITION_LIMIT {
        return Err(Error::PartitionTooLarge(s.len()));
    }
    Ok(c.partition(tm, sm).map(|(s1, s2)| Partition {
        s1: g.set_of(s1),
        s2: g.set_of(s2),
    }))
}

/// Decides c-equivalence from independences alone: each of `Tm`, `Zm`
/// must pass the set-subset test against `Tm ∪ Zm`.
pub fn boundary_union_equivalent(g: &Dag, x: &str, y: &str, t: &VarSet, z: &VarSet) -> Result<bool> {
    let c = Ctx::new(g, x, y)?;
    let (tm, zm) = (c.no_descendants("t", t)?, c.no_descendants("z", z)?);
    let (tb, zb) = (boundary_mask(g, c.x, tm), boundary_mask(g, c.x, zm));
    let union = tb | zb;
    for extra in [union & !tb, union & !zb] {
        if extra.count_ones() as usize > PARTITION_LIMIT {
            return Err(Error::PartitionTooLarge(extra.count_ones() as usize));
        }
    }
    Ok(c.partition(tb, union & !tb).is_some() && c.partition(zb, union & !zb).is_some())
}

pub fn admissibility_implications(g: &Dag, x: &str, y: &str, t: &VarSet, z: &VarSet) -> Result<ImplicationReport> {
    let c = Ctx::new(g, x, y)?;
    let (tm, zm) = (c.no_descendants("t", t)?, c.no_descendants("z", z)?);
    let (tb, zb) = (boundary_mask(g, c.x, tm), boundary_mask(g, c.x, zm));
    let ub = boundary_mask(g, c.x, tb | zb);
    let (xb, yb) = (bit(c.x), bit(c.y));
    Ok(ImplicationReport {
        t_boundary: g.set_of(tb),
        z_boundary: g.set_of(zb),
        union_boundary: g.set_of(ub),
        holds_given_z_boundary: dsep(g, ub & !zb, yb, xb | zb),
        holds_given_t_boundary: dsep(g, ub & !tb, yb, xb | tb),
    })
}

/// A chain `t ≈ … ≈ Tm ≈ … ≈ Zm ≈ … ≈ z` changing one variable per step,
/// or `None` when `t` and `z` are not c-equivalent.
///
/// The outer sections delete `t \ Tm` and then add `z \ Zm` in
/// lexicographic order. When the boundaries differ, the middle section is a
/// shortest path through admissible sets (breadth-first; deletions before
/// additions, each in lexicographic order). Every step is re-verified.
pub fn equivalence_chain(g: &Dag, x: &str, y: &str, t: &VarSet, z: &VarSet) -> Result<Option<Chain>> {
    let c = Ctx::new(g, x, y)?;
    let (tm, zm) = (c.no_descendants("t", t)?, c.no_descendants("z", z)?);
    let bd = BackDoor::new(g, c.x, c.y);
    let (tb, zb) = (boundary_mask(g, c.x, tm), boundary_mask(g, c.x, zm));
    if tb != zb && !(bd.admissible(tm) && bd.admissible(zm)) {
        return Ok(None);
    }

    let mut steps = vec![tm];
    let mut cur = tm;
    for v in bits(tm & !tb) {
        cur &= !bit(v);
        steps.push(cur);
    }
    if tb != zb {
        let pool = g.all_mask() & !g.desc_mask(bit(c.x)) & !bit(c.y);
        let middle = admissible_path(&bd, pool, tb, zb)?;
        steps.extend(middle.into_iter().skip(1));
    }
    cur = zb;
    for v in bits(zm & !zb) {
        cur |= bit(v);
        steps.push(cur);
    }

    let mut licenses = Vec::with_capacity(steps.len() - 1);
    for w in steps.windows(2) {
        licenses.push(license(&c, &bd, w[0], w[1]).ok_or_else(|| {
            Error::SearchExhausted(format!(
                "step {} ≈ {} failed re-verification",
                g.set_of(w[0]),
                g.set_of(w[1])
            ))
        })?);
    }
    Ok(Some(Chain {
        steps: steps.into_iter().map(|m| g.set_of(m)).collect(),
        licenses,
    }))
}

fn admissible_path(bd: &BackDoor, pool: u64, from: u64, to: u64) -> Result<Vec<u64>> {
    let mut parent: HashMap<u64, u64> = HashMap::from([(from, from)]);
    let mut queue = VecDeque::from([from]);
    while let Some(cur) = queue.pop_front() {
        if cur == to {
            let mut path = vec![to];
            let mut at = to;
            while at != from {
                at = parent[&at];
                path.push(at);
            }
            path.reverse();
            return Ok(path);
        }
        let deletions = bits(cur).map(|v| cur & !bit(v));
        let additions = bits(pool & !cur).map(|v| cur | bit(v));
        for next in deletions.chain(additions) {
            if parent.contains_key(&next) || (next != to && !bd.admissible(next)) {
                continue;
            }
            if parent.len() >= CHAIN_STATE_LIMIT {
                return Err(Error::SearchExhausted(format!(
                    "visited {CHAIN_STATE_LIMIT} sets without connecting the boundaries"
                )));
            }
            parent.insert(next, cur);
            queue.push_back(next);
        }
    }
    Err(Error::SearchExhausted(
        "no single-step path through admissible sets joins the boundaries".into(),
    ))
}

fn license(c: &Ctx<'_>, bd: &BackDoor, a: u64, b: u64) -> Option<License> {
    let (small, big) = if a & b == a { (a, b) } else { (b, a) };
    let extra = big & !small;
    let (g, x, y) = (c.g, bit(c.x), bit(c.y));
    if extra.count_ones() != 1 || small & big != small {
        return None;
    }
    if dsep(g, extra, x, small) {
        Some(License::SeparatedFromTreatment)
    } else if dsep(g, extra, y, small | x) {
        Some(License::SeparatedFromOutcome)
    } else if boundary_mask(g, c.x, a) == boundary_mask(g, c.x, b) {
        Some(License::BoundaryReduction)
    } else if bd.admissible(a) && bd.admissible(b) {
        Some(License::BothAdmissible)
    } else {
        None
    }
}
