//! Mixed graphs: hidden-variable DAGs, ADMGs and conditional ADMGs share one
//! representation, distinguished by which vertices are hidden or fixed.
//!
//! Every set that leaves this module is a [`VertexSet`], ordered
//! lexicographically by name, so downstream choices are reproducible.

mod io;
mod projection;
mod structure;

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::GraphJson;
pub use structure::ColliderReading;

/// A named vertex. Names are case-sensitive and may not contain whitespace
/// or any of `|,;`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Vertex(String);

impl Vertex {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        let reserved = |c: char| c.is_whitespace() || matches!(c, '|' | ',' | ';');
        if name.is_empty() || name.chars().any(reserved) {
            return Err(Error::InvalidName(name));
        }
        Ok(Vertex(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Vertex {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Vertex::new(value)
    }
}

impl From<Vertex> for String {
    fn from(v: Vertex) -> String {
        v.0
    }
}

impl Borrow<str> for Vertex {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub type VertexSet = BTreeSet<Vertex>;

/// Builds a vertex set from names, validating each one.
pub fn vertex_set<I>(names: I) -> Result<VertexSet>
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    names.into_iter().map(|n| Vertex::new(n.as_ref())).collect()
}

/// Formats a set as `{A, B, C}`.
pub fn fmt_set(set: &VertexSet) -> String {
    let names: Vec<&str> = set.iter().map(Vertex::as_str).collect();
    format!("{{{}}}", names.join(", "))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedGraph {
    vertices: VertexSet,
    random: VertexSet,
    fixed: VertexSet,
    hidden: VertexSet,
    directed: BTreeSet<(Vertex, Vertex)>,
    /// Stored with the lexicographically smaller endpoint first.
    bidirected: BTreeSet<(Vertex, Vertex)>,
    parents: BTreeMap<Vertex, VertexSet>,
    children: BTreeMap<Vertex, VertexSet>,
    spouses: BTreeMap<Vertex, VertexSet>,
}

/// Accumulates names and edges; [`GraphBuilder::build`] performs all validity
/// checks.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    vertices: Vec<String>,
    hidden: Vec<String>,
    fixed: Vec<String>,
    directed: Vec<(String, String)>,
    bidirected: Vec<(String, String)>,
}

impl GraphBuilder {
    pub fn vertex(mut self, name: impl Into<String>) -> Self {
        self.vertices.push(name.into());
        self
    }

    pub fn vertices<I>(mut self, names: I) -> Self
    where
        I: IntoIterator,
        I::Item: Into<String>,
    {
        self.vertices.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn hidden<I>(mut self, names: I) -> Self
    where
        I: IntoIterator,
        I::Item: Into<String>,
    {
        self.hidden.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn fixed<I>(mut self, names: I) -> Self
    where
        I: IntoIterator,
        I::Item: Into<String>,
    {
        self.fixed.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn directed(mut self, tail: impl Into<String>, head: impl Into<String>) -> Self {
        self.directed.push((tail.into(), head.into()));
        self
    }

    pub fn bidirected(mut self, u: impl Into<String>, v: impl Into<String>) -> Self {
        self.bidirected.push((u.into(), v.into()));
        self
    }

    pub fn build(self) -> Result<MixedGraph> {
        let mut vertices = VertexSet::new();
        for name in self.vertices {
            let v = Vertex::new(name)?;
            if !vertices.insert(v.clone()) {
                return Err(Error::DuplicateVertex(v));
            }
        }
        let lookup = |name: &str| -> Result<Vertex> {
            vertices
                .get(name)
                .cloned()
                .ok_or_else(|| Error::UnknownVertex(name.to_string()))
        };
        let hidden = self
            .hidden
            .iter()
            .map(|n| lookup(n))
            .collect::<Result<VertexSet>>()?;
        let fixed = self
            .fixed
            .iter()
            .map(|n| lookup(n))
            .collect::<Result<VertexSet>>()?;

        let mut directed = BTreeSet::new();
        for (t, h) in &self.directed {
            let (t, h) = (lookup(t)?, lookup(h)?);
            if t == h {
                return Err(Error::SelfLoop(t));
            }
            if !directed.insert((t.clone(), h.clone())) {
                return Err(Error::DuplicateEdge(format!("{t} -> {h}")));
            }
        }
        let mut bidirected = BTreeSet::new();
        for (u, v) in &self.bidirected {
            let (u, v) = (lookup(u)?, lookup(v)?);
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            let pair = if u < v { (u, v) } else { (v, u) };
            if !bidirected.insert(pair.clone()) {
                return Err(Error::DuplicateEdge(format!("{} <-> {}", pair.0, pair.1)));
            }
        }

        let g = MixedGraph::from_parts(vertices, fixed, hidden, directed, bidirected);
        g.validate()?;
        Ok(g)
    }
}

impl MixedGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    /// Assembles a graph without validation. Callers are graph rewrites that
    /// preserve validity by construction.
    pub(crate) fn from_parts(
        vertices: VertexSet,
        fixed: VertexSet,
        hidden: VertexSet,
        directed: BTreeSet<(Vertex, Vertex)>,
        bidirected: BTreeSet<(Vertex, Vertex)>,
    ) -> Self {
        let random = vertices.difference(&fixed).cloned().collect();
        let empty = || -> BTreeMap<Vertex, VertexSet> {
            vertices
                .iter()
                .map(|v| (v.clone(), VertexSet::new()))
                .collect()
        };
        let (mut parents, mut children, mut spouses) = (empty(), empty(), empty());
        for (t, h) in &directed {
            parents.get_mut(h).expect("endpoint").insert(t.clone());
            children.get_mut(t).expect("endpoint").insert(h.clone());
        }
        for (u, v) in &bidirected {
            spouses.get_mut(u).expect("endpoint").insert(v.clone());
            spouses.get_mut(v).expect("endpoint").insert(u.clone());
        }
        MixedGraph {
            vertices,
            random,
            fixed,
            hidden,
            directed,
            bidirected,
            parents,
            children,
            spouses,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(v) = self.fixed.intersection(&self.hidden).next() {
            return Err(Error::InvalidGraph(format!("{v} is both fixed and hidden")));
        }
        for f in &self.fixed {
            if let Some(p) = self.parents[f].iter().next() {
                return Err(Error::InvalidGraph(format!(
                    "fixed vertex {f} has an incoming edge from {p}"
                )));
            }
            if let Some(s) = self.spouses[f].iter().next() {
                return Err(Error::InvalidGraph(format!(
                    "fixed vertex {f} has a bidirected edge to {s}"
                )));
            }
        }
        if !self.hidden.is_empty() && (!self.bidirected.is_empty() || !self.fixed.is_empty()) {
            return Err(Error::InvalidGraph(
                "a graph with hidden vertices must be a plain DAG (no bidirected edges or fixed vertices)"
                    .into(),
            ));
        }
        if let Some(cycle) = self.find_cycle() {
            return Err(Error::Cycle(cycle));
        }
        Ok(())
    }

    fn find_cycle(&self) -> Option<Vec<Vertex>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let mut mark: BTreeMap<&Vertex, Mark> =
            self.vertices.iter().map(|v| (v, Mark::New)).collect();
        let mut stack: Vec<&Vertex> = Vec::new();

        fn visit<'a>(
            g: &'a MixedGraph,
            v: &'a Vertex,
            mark: &mut BTreeMap<&'a Vertex, Mark>,
            stack: &mut Vec<&'a Vertex>,
        ) -> Option<Vec<Vertex>> {
            mark.insert(v, Mark::Active);
            stack.push(v);
            for c in &g.children[v] {
                match mark[c] {
                    Mark::Active => {
                        let start = stack.iter().position(|s| *s == c).expect("on stack");
                        return Some(stack[start..].iter().map(|s| (*s).clone()).collect());
                    }
                    Mark::New => {
                        if let Some(cycle) = visit(g, c, mark, stack) {
                            return Some(cycle);
                        }
                    }
                    Mark::Done => {}
                }
            }
            stack.pop();
            mark.insert(v, Mark::Done);
            None
        }

        for v in &self.vertices {
            if mark[v] == Mark::New {
                if let Some(cycle) = visit(self, v, &mut mark, &mut stack) {
                    return Some(cycle);
                }
            }
        }
        None
    }

    /// All vertices, random and fixed.
    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    pub fn random(&self) -> &VertexSet {
        &self.random
    }

    pub fn fixed(&self) -> &VertexSet {
        &self.fixed
    }

    pub fn hidden(&self) -> &VertexSet {
        &self.hidden
    }

    /// Vertices that are not hidden.
    pub fn observed(&self) -> VertexSet {
        self.vertices.difference(&self.hidden).cloned().collect()
    }

    pub fn directed_edges(&self) -> &BTreeSet<(Vertex, Vertex)> {
        &self.directed
    }

    /// Bidirected edges, each stored as `(smaller, larger)`.
    pub fn bidirected_edges(&self) -> &BTreeSet<(Vertex, Vertex)> {
        &self.bidirected
    }

    pub fn edge_count(&self) -> usize {
        self.directed.len() + self.bidirected.len()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.vertices.contains(name)
    }

    pub fn vertex(&self, name: &str) -> Result<&Vertex> {
        self.vertices
            .get(name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn is_random(&self, v: &Vertex) -> bool {
        self.random.contains(v)
    }

    pub fn is_fixed(&self, v: &Vertex) -> bool {
        self.fixed.contains(v)
    }

    pub fn has_directed(&self, tail: &Vertex, head: &Vertex) -> bool {
        self.directed.contains(&(tail.clone(), head.clone()))
    }

    pub fn has_bidirected(&self, u: &Vertex, v: &Vertex) -> bool {
        self.spouses.get(u).is_some_and(|s| s.contains(v))
    }

    /// Direct parents of a single vertex.
    pub fn parents_of(&self, v: &Vertex) -> &VertexSet {
        &self.parents[v]
    }

    pub fn children_of(&self, v: &Vertex) -> &VertexSet {
        &self.children[v]
    }

    /// Vertices joined to `v` by a bidirected edge.
    pub fn spouses_of(&self, v: &Vertex) -> &VertexSet {
        &self.spouses[v]
    }

    pub(crate) fn require_known(&self, set: &VertexSet) -> Result<()> {
        match set.iter().find(|v| !self.vertices.contains(*v)) {
            Some(v) => Err(Error::UnknownVertex(v.to_string())),
            None => Ok(()),
        }
    }

    pub(crate) fn require_random(&self, set: &VertexSet) -> Result<()> {
        self.require_known(set)?;
        match set.iter().find(|v| !self.random.contains(*v)) {
            Some(v) => Err(Error::NotRandom { vertex: v.clone() }),
            None => Ok(()),
        }
    }

    /// Vertices in an order where every parent precedes its children; ties
    /// are broken lexicographically.
    pub fn topological_order(&self) -> Vec<Vertex> {
        let mut indegree: BTreeMap<&Vertex, usize> = self
            .vertices
            .iter()
            .map(|v| (v, self.parents[v].len()))
            .collect();
        let mut ready: BTreeSet<&Vertex> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(v, _)| *v)
            .collect();
        let mut order = Vec::with_capacity(self.vertices.len());
        while let Some(v) = ready.pop_first() {
            order.push(v.clone());
            for c in &self.children[v] {
                let d = indegree.get_mut(c).expect("vertex");
                *d -= 1;
                if *d == 0 {
                    ready.insert(c);
                }
            }
        }
        order
    }

    /// Same graph with the random/fixed partition and edges untouched, but
    /// `v` moved to the fixed set and every arrowhead into it dropped.
    pub(crate) fn with_fixed_vertex(&self, v: &Vertex) -> MixedGraph {
        let mut fixed = self.fixed.clone();
        fixed.insert(v.clone());
        let directed = self
            .directed
            .iter()
            .filter(|(_, h)| h != v)
            .cloned()
            .collect();
        let bidirected = self
            .bidirected
            .iter()
            .filter(|(a, b)| a != v && b != v)
            .cloned()
            .collect();
        MixedGraph::from_parts(
            self.vertices.clone(),
            fixed,
            self.hidden.clone(),
            directed,
            bidirected,
        )
    }
}

impl fmt::Display for MixedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (t, h) in &self.directed {
            parts.push(format!("{t}->{h}"));
        }
        for (u, v) in &self.bidirected {
            parts.push(format!("{u}<->{v}"));
        }
        write!(f, "random {}", fmt_set(&self.random))?;
        if !self.fixed.is_empty() {
            write!(f, " fixed {}", fmt_set(&self.fixed))?;
        }
        if !self.hidden.is_empty() {
            write!(f, " hidden {}", fmt_set(&self.hidden))?;
        }
        write!(f, " edges [{}]", parts.join(", "))
    }
}
