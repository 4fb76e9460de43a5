// SPDX-License-Identifier: Apache-2.0
//! Plain-text formats for models and contingency tables.
//!
//! A model file declares state counts and table rows; the graph is read off
//! the parent names that appear in the rows:
//!
//! ```text
//! arity U 2
//! arity X 2
//! cpt U | : 0.4 0.6
//! cpt X | U=0 : 0.8 0.2
//! cpt X | U=1 : 0.3 0.7
//! ```
//!
//! A table file lists the variables with their state counts, then one line
//! per joint state with a probability or count. Omitted states have mass 0.
//!
//! ```text
//! vars X:2 Y:2
//! 0 0 0.1
//! 0 1 0.3
//! 1 0 0.2
//! 1 1 0.4
//! ```
//!
//! Both formats accept `#` comments. Numbers are written in shortest
//! round-trip form, so printing and re-parsing is exact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::distribution::{state_count, Distribution};
use super::model::DiscreteModel;
use crate::error::{Error, Result};
use crate::graph::{bits, Dag, NodeId};

fn err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidModel(format!("line {line}: {msg}"))
}

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let words: Vec<&str> = l.split_whitespace().collect();
        (!words.is_empty()).then_some((i + 1, words))
    })
}

fn number(line: usize, w: &str) -> Result<f64> {
    w.parse::<f64>().map_err(|_| err(line, format!("expected a number, found {w:?}")))
}

fn count(line: usize, w: &str) -> Result<usize> {
    w.parse::<usize>().map_err(|_| err(line, format!("expected a state index, found {w:?}")))
}

fn name(line: usize, w: &str) -> Result<NodeId> {
    NodeId::new(w).map_err(|e| err(line, e))
}

type Row = (usize, BTreeMap<NodeId, usize>, Vec<f64>);

pub fn parse_model(text: &str) -> Result<DiscreteModel> {
    let mut arity: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut rows: BTreeMap<NodeId, Vec<Row>> = BTreeMap::new();
    for (ln, words) in lines(text) {
        match words[0] {
            "arity" => {
                if words.len() != 3 {
                    return Err(err(ln, "expected `arity NAME K`"));
                }
                let n = name(ln, words[1])?;
                let k = count(ln, words[2])?;
                if arity.insert(n.clone(), k).is_some() {
                    return Err(err(ln, format!("arity of {n} given twice")));
                }
            }
            "cpt" => {
                let bar = words.iter().position(|&w| w == "|");
                let colon = words.iter().position(|&w| w == ":");
                let (Some(bar), Some(colon)) = (bar, colon) else {
                    return Err(err(ln, "expected `cpt NAME | P=k ... : p0 p1 ...`"));
                };
                if bar != 2 || colon < bar {
                    return Err(err(ln, "expected `cpt NAME | P=k ... : p0 p1 ...`"));
                }
                let node = name(ln, words[1])?;
                let mut config = BTreeMap::new();
                for w in &words[bar + 1..colon] {
                    let (p, k) = w
                        .split_once('=')
                        .ok_or_else(|| err(ln, format!("expected PARENT=k, found {w:?}")))?;
                    if config.insert(name(ln, p)?, count(ln, k)?).is_some() {
                        return Err(err(ln, format!("parent {p} repeated")));
                    }
                }
                let probs = words[colon + 1..]
                    .iter()
                    .map(|w| number(ln, w))
                    .collect::<Result<Vec<_>>>()?;
                rows.entry(node).or_default().push((ln, config, probs));
            }
            other => return Err(err(ln, format!("unknown directive {other:?}"))),
        }
    }

    let mut edges = Vec::new();
    let mut parents_of: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for (node, rs) in &rows {
        if !arity.contains_key(node) {
            return Err(err(rs[0].0, format!("{node} has no arity line")));
        }
        let parents: Vec<NodeId> = rs[0].1.keys().cloned().collect();
        for (ln, config, _) in rs {
            if !config.keys().eq(parents.iter()) {
                return Err(err(*ln, format!("rows of {node} disagree on its parents")));
            }
            for (p, &k) in config {
                let a = *arity
                    .get(p)
                    .ok_or_else(|| err(*ln, format!("parent {p} has no arity line")))?;
                if k >= a {
                    return Err(err(*ln, format!("state {k} of {p} out of range")));
                }
            }
        }
        edges.extend(parents.iter().map(|p| (p.clone(), node.clone())));
        parents_of.insert(node.clone(), parents);
    }
    let dag = Dag::new(arity.keys().cloned(), edges)?;

    let mut tables = BTreeMap::new();
    for (node, rs) in rows {
        let parents = &parents_of[&node];
        let radix: Vec<usize> = parents.iter().map(|p| arity[p]).collect();
        let mut slots: Vec<Option<Vec<f64>>> = vec![None; radix.iter().product()];
        for (ln, config, probs) in rs {
            let r = parents.iter().zip(&radix).fold(0, |acc, (p, &a)| acc * a + config[p]);
            if slots[r].replace(probs).is_some() {
                return Err(err(ln, format!("row of {node} given twice")));
            }
        }
        let table: Option<Vec<Vec<f64>>> = slots.into_iter().collect();
        let table = table.ok_or_else(|| Error::InvalidModel(format!("missing rows for {node}")))?;
        tables.insert(node, table);
    }
    DiscreteModel::new(dag, &arity, &tables)
}

pub fn write_model(m: &DiscreteModel) -> String {
    let g = m.dag();
    let mut out = String::new();
    for (n, a) in g.nodes().iter().zip(m.arities()) {
        writeln!(out, "arity {n} {a}").unwrap();
    }
    for (i, n) in g.nodes().iter().enumerate() {
        let parents: Vec<usize> = bits(g.parent_mask(i)).collect();
        let radix: Vec<usize> = parents.iter().map(|&p| m.arities()[p]).collect();
        let table = m.table(n).expect("node of the model");
        let width = m.arities()[i];
        for (r, row) in table.chunks(width).enumerate() {
            let mut digits = vec![0; parents.len()];
            let mut rest = r;
            for k in (0..parents.len()).rev() {
                digits[k] = rest % radix[k];
                rest /= radix[k];
            }
            write!(out, "cpt {n} |").unwrap();
            for (&p, d) in parents.iter().zip(&digits) {
                write!(out, " {}={d}", g.nodes()[p]).unwrap();
            }
            write!(out, " :").unwrap();
            for p in row {
                write!(out, " {p:?}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn parse_table(text: &str) -> Result<Distribution> {
    let mut it = lines(text);
    let (ln, header) = it.next().ok_or_else(|| Error::InvalidModel("empty table".into()))?;
    if header[0] != "vars" || header.len() < 2 {
        return Err(err(ln, "expected `vars NAME:K ...`"));
    }
    let mut names = Vec::new();
    let mut arity = Vec::new();
    let mut seen = BTreeSet::new();
    for w in &header[1..] {
        let (n, k) = w
            .split_once(':')
            .ok_or_else(|| err(ln, format!("expected NAME:K, found {w:?}")))?;
        let n = name(ln, n)?;
        if !seen.insert(n.clone()) {
            return Err(err(ln, format!("{n} listed twice")));
        }
        names.push(n);
        arity.push(count(ln, k)?);
    }
    if arity.iter().any(|&a| a < 2) {
        return Err(err(ln, "state counts must be at least 2"));
    }
    let size = state_count(&arity)?;
    let mut masses = vec![0.0; size];
    let mut filled = vec![false; size];
    for (ln, words) in it {
        if words.len() != names.len() + 1 {
            return Err(err(ln, format!("expected {} states and a mass", names.len())));
        }
        let mut idx = 0;
        for (w, &a) in words.iter().zip(&arity) {
            let s = count(ln, w)?;
            if s >= a {
                return Err(err(ln, format!("state {s} out of range")));
            }
            idx = idx * a + s;
        }
        if std::mem::replace(&mut filled[idx], true) {
            return Err(err(ln, "joint state listed twice"));
        }
        masses[idx] = number(ln, words[names.len()])?;
    }
    Distribution::new(names, arity, masses)
}

/// Writes every state with positive probability.
pub fn write_table(d: &Distribution) -> String {
    let mut out = String::from("vars");
    for (n, a) in d.names().iter().zip(d.arities()) {
        write!(out, " {n}:{a}").unwrap();
    }
    out.push('\n');
    let mut state = vec![0; d.names().len()];
    for (idx, &p) in d.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        d.decode(idx, &mut state);
        for s in &state {
            write!(out, "{s} ").unwrap();
        }
        writeln!(out, "{p:?}").unwrap();
    }
    out
}
