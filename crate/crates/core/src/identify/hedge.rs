//! C-forests and hedges: certificates that a query is not identified.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::Query;
use crate::error::{Error, Result};
use crate::graph::{fmt_set, MixedGraph, Vertex, VertexSet};

/// A bidirected-connected set together with directed edges along which every
/// member reaches a root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CForest {
    pub vertices: VertexSet,
    pub roots: VertexSet,
    pub witness_edges: BTreeSet<(Vertex, Vertex)>,
}

/// Two C-forests with shared roots, the inner strictly inside the outer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HedgeWitness {
    pub inner: CForest,
    pub outer: CForest,
    pub query: Query,
}

/// The first clause of the hedge definition that a candidate violates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HedgeDefect {
    EmptyForest,
    RootsDiffer,
    RootOutsideForest(Vertex),
    NotBidirectedConnected(VertexSet),
    ForeignEdge(Vertex, Vertex),
    RootUnreachable(Vertex),
    NotStrictSubset,
    InnerMeetsTreatment(Vertex),
    NoTreatmentInDifference,
    RootNotAncestralToOutcome(Vertex),
}

impl fmt::Display for HedgeDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HedgeDefect::EmptyForest => write!(f, "a forest has no vertices"),
            HedgeDefect::RootsDiffer => write!(f, "the forests have different roots"),
            HedgeDefect::RootOutsideForest(r) => write!(f, "root {r} is not in its forest"),
            HedgeDefect::NotBidirectedConnected(s) => {
                write!(f, "{} is not bidirected-connected", fmt_set(s))
            }
            HedgeDefect::ForeignEdge(a, b) => {
                write!(
                    f,
                    "witness edge {a} -> {b} is not a graph edge inside the forest"
                )
            }
            HedgeDefect::RootUnreachable(v) => {
                write!(f, "{v} has no witness path to a root")
            }
            HedgeDefect::NotStrictSubset => write!(f, "inner forest is not a proper subset"),
            HedgeDefect::InnerMeetsTreatment(v) => write!(f, "inner forest contains treatment {v}"),
            HedgeDefect::NoTreatmentInDifference => {
                write!(f, "no treatment lies in outer minus inner")
            }
            HedgeDefect::RootNotAncestralToOutcome(r) => {
                write!(
                    f,
                    "root {r} has no treatment-avoiding directed path to an outcome"
                )
            }
        }
    }
}

/// Each non-root keeps an edge to its least child that still reaches a root.
fn c_forest(g: &MixedGraph, vertices: &VertexSet, roots: &VertexSet) -> CForest {
    let mut reaches = roots.clone();
    let mut queue: VecDeque<Vertex> = roots.iter().cloned().collect();
    while let Some(v) = queue.pop_front() {
        for p in g.parents_of(&v) {
            if vertices.contains(p) && reaches.insert(p.clone()) {
                queue.push_back(p.clone());
            }
        }
    }
    let mut witness_edges = BTreeSet::new();
    for v in vertices.difference(roots) {
        if let Some(c) = g
            .children_of(v)
            .iter()
            .find(|c| vertices.contains(*c) && reaches.contains(*c))
        {
            witness_edges.insert((v.clone(), c.clone()));
        }
    }
    CForest {
        vertices: vertices.clone(),
        roots: roots.clone(),
        witness_edges,
    }
}

/// Hedge for a district `d` of the query's outcome-ancestral subgraph that is
/// not intrinsic: `d` inside its reachable closure, rooted at the members of
/// `d` with no children in `d`.
pub fn find_hedge(g: &MixedGraph, q: &Query, d: &VertexSet) -> Result<HedgeWitness> {
    let closure = g.reachable_closure(d)?;
    if closure == *d {
        return Err(Error::InvalidInput(format!(
            "{} is reachable, so no hedge is rooted in it",
            fmt_set(d)
        )));
    }
    let roots: VertexSet = d
        .iter()
        .filter(|v| g.children_of(v).is_disjoint(d))
        .cloned()
        .collect();
    Ok(HedgeWitness {
        inner: c_forest(g, d, &roots),
        outer: c_forest(g, &closure, &roots),
        query: q.clone(),
    })
}

fn check_forest(g: &MixedGraph, f: &CForest) -> std::result::Result<(), HedgeDefect> {
    if f.vertices.is_empty() {
        return Err(HedgeDefect::EmptyForest);
    }
    if let Some(r) = f.roots.iter().find(|r| !f.vertices.contains(*r)) {
        return Err(HedgeDefect::RootOutsideForest(r.clone()));
    }
    if !f.vertices.iter().all(|v| g.is_random(v)) || !g.is_bidirected_connected(&f.vertices) {
        return Err(HedgeDefect::NotBidirectedConnected(f.vertices.clone()));
    }
    let mut parents: BTreeMap<&Vertex, Vec<&Vertex>> = BTreeMap::new();
    for (a, b) in &f.witness_edges {
        if !g.has_directed(a, b) || !f.vertices.contains(a) || !f.vertices.contains(b) {
            return Err(HedgeDefect::ForeignEdge(a.clone(), b.clone()));
        }
        parents.entry(b).or_default().push(a);
    }
    let mut reached: BTreeSet<&Vertex> = f.roots.iter().collect();
    let mut queue: VecDeque<&Vertex> = f.roots.iter().collect();
    while let Some(v) = queue.pop_front() {
        for p in parents.get(v).into_iter().flatten() {
            if reached.insert(p) {
                queue.push_back(p);
            }
        }
    }
    match f.vertices.iter().find(|v| !reached.contains(v)) {
        Some(v) => Err(HedgeDefect::RootUnreachable(v.clone())),
        None => Ok(()),
    }
}

/// Checks every clause of the hedge definition for `w` against query `q`.
pub fn check_hedge(
    g: &MixedGraph,
    q: &Query,
    w: &HedgeWitness,
) -> std::result::Result<(), HedgeDefect> {
    if w.inner.roots != w.outer.roots {
        return Err(HedgeDefect::RootsDiffer);
    }
    check_forest(g, &w.inner)?;
    check_forest(g, &w.outer)?;
    let (f, f2) = (&w.inner.vertices, &w.outer.vertices);
    if !(f.is_subset(f2) && f.len() < f2.len()) {
        return Err(HedgeDefect::NotStrictSubset);
    }
    let a = q.treatments();
    if let Some(v) = f.intersection(&a).next() {
        return Err(HedgeDefect::InnerMeetsTreatment(v.clone()));
    }
    if !f2.difference(f).any(|v| a.contains(v)) {
        return Err(HedgeDefect::NoTreatmentInDifference);
    }
    let known = q
        .outcomes()
        .iter()
        .chain(&a)
        .all(|v| g.contains(v.as_str()));
    let ystar = if known {
        g.ancestral_avoiding(q.outcomes(), &a).unwrap_or_default()
    } else {
        VertexSet::new()
    };
    match w.inner.roots.iter().find(|r| !ystar.contains(*r)) {
        Some(r) => Err(HedgeDefect::RootNotAncestralToOutcome(r.clone())),
        None => Ok(()),
    }
}

pub fn is_hedge(g: &MixedGraph, q: &Query, w: &HedgeWitness) -> bool {
    check_hedge(g, q, w).is_ok()
}

impl HedgeWitness {
    pub fn to_json_value(&self) -> serde_json::Value {
        let names = |s: &VertexSet| -> Vec<String> { s.iter().map(|v| v.to_string()).collect() };
        serde_json::json!({
            "inner": names(&self.inner.vertices),
            "outer": names(&self.outer.vertices),
            "roots": names(&self.inner.roots),
        })
    }
}

impl fmt::Display for HedgeWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "hedge for {}: inner {}, outer {}, roots {}",
            self.query,
            fmt_set(&self.inner.vertices),
            fmt_set(&self.outer.vertices),
            fmt_set(&self.inner.roots)
        )
    }
}
