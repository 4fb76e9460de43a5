// SPDX-License-Identifier: Apache-2.0
//! Testing candidate diagrams against an observed distribution.
//!
//! Each candidate graph predicts that certain covariate sets are
//! c-equivalent and that certain independences hold. A prediction is refuted
//! when the distribution shows a gap larger than the tolerance; a candidate
//! with any refuted prediction is rejected. Only positive predictions are
//! tested, since a graph that denies an equivalence does not forbid it.

use serde::Serialize;

use crate::equivalence::{admissibility_implications, c_equivalent};
use crate::error::{Error, Result};
use crate::graph::{Dag, NodeId, VarSet};
use crate::oracle::{estimand_gap, Distribution};

/// Default tolerance for exact (non-sampled) distributions.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Claim {
    /// `A(x, y, t) = A(x, y, z)`.
    Equivalent { t: VarSet, z: VarSet },
    /// `a ⊥ b | given`.
    Independent { a: VarSet, b: VarSet, given: VarSet },
}

impl std::fmt::Display for Claim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Claim::Equivalent { t, z } => write!(f, "{t} ≈ {z}"),
            Claim::Independent { a, b, given } => write!(f, "{a} ⊥ {b} | {given}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub claim: Claim,
    /// Largest observed deviation from the claim.
    pub gap: f64,
    pub refuted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateReport {
    pub index: usize,
    /// Set when `t` or `z` contains a descendant of `x` in this candidate, in
    /// which case it makes no predictions.
    pub descendant_conflict: bool,
    pub predictions: Vec<Prediction>,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalsificationReport {
    pub tol: f64,
    pub candidates: Vec<CandidateReport>,
}

impl FalsificationReport {
    pub fn rejected(&self) -> Vec<usize> {
        self.candidates.iter().filter(|c| c.rejected).map(|c| c.index).collect()
    }

    pub fn surviving(&self) -> Vec<usize> {
        self.candidates.iter().filter(|c| !c.rejected).map(|c| c.index).collect()
    }
}

/// The claims `g` makes about `t` and `z`.
pub fn predictions(g: &Dag, x: &str, y: &str, t: &VarSet, z: &VarSet) -> Result<Vec<Claim>> {
    let report = admissibility_implications(g, x, y, t, z)?;
    let (tm, zm) = (report.t_boundary.clone(), report.z_boundary.clone());
    let union = tm.union(&zm);
    let mut claims = Vec::new();
    let equivalent = |a: &VarSet, b: &VarSet, claims: &mut Vec<Claim>| -> Result<()> {
        let claim = Claim::Equivalent { t: a.clone(), z: b.clone() };
        if a != b && !claims.contains(&claim) && c_equivalent(g, x, y, a, b)?.equivalent {
            claims.push(claim);
        }
        Ok(())
    };
    equivalent(t, z, &mut claims)?;
    equivalent(t, &tm, &mut claims)?;
    equivalent(z, &zm, &mut claims)?;
    equivalent(&tm, &union, &mut claims)?;
    equivalent(&zm, &union, &mut claims)?;

    let xs = VarSet::singleton(NodeId::new(x)?);
    let ys = VarSet::singleton(NodeId::new(y)?);
    for (s, sm) in [(t, &tm), (z, &zm)] {
        let rest = s.difference(sm);
        if !rest.is_empty() {
            claims.push(Claim::Independent { a: xs.clone(), b: rest, given: sm.clone() });
        }
    }
    let ub = &report.union_boundary;
    for (holds, given) in [(report.holds_given_z_boundary, &zm), (report.holds_given_t_boundary, &tm)] {
        let a = ub.difference(given);
        let claim = Claim::Independent { a, b: ys.clone(), given: given.union(&xs) };
        if holds && !matches!(&claim, Claim::Independent { a, .. } if a.is_empty()) && !claims.contains(&claim) {
            claims.push(claim);
        }
    }
    Ok(claims)
}

fn measure(d: &Distribution, x: &str, y: &str, claim: &Claim) -> Result<f64> {
    match claim {
        Claim::Equivalent { t, z } => estimand_gap(d, x, y, t, z),
        Claim::Independent { a, b, given } => d.max_dependence(a, b, given),
    }
}

/// Tests every candidate's predictions against `d`.
pub fn falsify(
    d: &Distribution,
    graphs: &[Dag],
    x: &str,
    y: &str,
    t: &VarSet,
    z: &VarSet,
    tol: f64,
) -> Result<FalsificationReport> {
    let mut candidates = Vec::with_capacity(graphs.len());
    for (index, g) in graphs.iter().enumerate() {
        if let Some(missing) = g.nodes().iter().find(|n| d.idx(n).is_err()) {
            return Err(Error::InvalidModel(format!(
                "candidate {index} mentions {missing}, which the distribution lacks"
            )));
        }
        let claims = match predictions(g, x, y, t, z) {
            Ok(c) => c,
            Err(Error::DescendantOfTreatment { .. }) => {
                candidates.push(CandidateReport {
                    index,
                    descendant_conflict: true,
                    predictions: Vec::new(),
                    rejected: false,
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let predictions = claims
            .into_iter()
            .map(|claim| {
                let gap = measure(d, x, y, &claim)?;
                Ok(Prediction { claim, gap, refuted: gap > tol })
            })
            .collect::<Result<Vec<_>>>()?;
        candidates.push(CandidateReport {
            index,
            descendant_conflict: false,
            rejected: predictions.iter().any(|p| p.refuted),
            predictions,
        });
    }
    Ok(FalsificationReport { tol, candidates })
}

/// Three candidate diagrams over `T, Z, X, Y` for the demonstration:
///
/// 0. `T→X, T→Z, Z→Y, X→Y`: both `{T}` and `{Z}` admissible.
/// 1. `T→X, T→Z, Z→X, Z→Y, X→Y`: only `{Z}` admissible.
/// 2. `T→X, T→Y, Z→X, Z→Y, X→Y`: neither admissible alone.
pub fn demo_candidates() -> [Dag; 3] {
    [
        "T -> X\nT -> Z\nZ -> Y\nX -> Y",
        "T -> X\nT -> Z\nZ -> X\nZ -> Y\nX -> Y",
        "T -> X\nT -> Y\nZ -> X\nZ -> Y\nX -> Y",
    ]
    .map(|s| s.parse().expect("demo graph parses"))
}
