use std::collections::{BTreeSet, VecDeque};

use super::{MixedGraph, Vertex, VertexSet};
use crate::error::{Error, Result};

/// Which paths count when collecting the collider blanket of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColliderReading {
    /// Every path whose interior vertices are all colliders, including
    /// single-edge paths, searched in the whole graph.
    Literal,
    /// Only collider paths with at least two edges; endpoints only.
    MultiEdge,
    /// Collider paths (single edges included) inside the subgraph obtained by
    /// deleting the proper descendants of the vertex. This reading makes
    /// `p(v | blanket)` coincide with conditioning on all non-descendants.
    #[default]
    NonDescendant,
}

impl MixedGraph {
    fn closure<'a>(
        &'a self,
        seeds: &VertexSet,
        step: impl Fn(&Vertex) -> &'a VertexSet,
    ) -> VertexSet {
        let mut seen = seeds.clone();
        let mut queue: VecDeque<Vertex> = seeds.iter().cloned().collect();
        while let Some(v) = queue.pop_front() {
            for w in step(&v) {
                if seen.insert(w.clone()) {
                    queue.push_back(w.clone());
                }
            }
        }
        seen
    }

    /// Ancestors of `set`, the set itself included.
    pub fn ancestors(&self, set: &VertexSet) -> Result<VertexSet> {
        self.require_known(set)?;
        Ok(self.closure(set, |v| &self.parents[v]))
    }

    /// Descendants of `set`, the set itself included.
    pub fn descendants(&self, set: &VertexSet) -> Result<VertexSet> {
        self.require_known(set)?;
        Ok(self.closure(set, |v| &self.children[v]))
    }

    /// Union of the direct parents of every member. Members of `set` appear
    /// when they are parents of other members; subtract `set` for `pa(S) \ S`.
    pub fn parents(&self, set: &VertexSet) -> Result<VertexSet> {
        self.require_known(set)?;
        Ok(set
            .iter()
            .flat_map(|v| self.parents[v].iter().cloned())
            .collect())
    }

    pub fn children(&self, set: &VertexSet) -> Result<VertexSet> {
        self.require_known(set)?;
        Ok(set
            .iter()
            .flat_map(|v| self.children[v].iter().cloned())
            .collect())
    }

    /// The bidirected-connected component of a random vertex.
    pub fn district_of(&self, v: &Vertex) -> Result<VertexSet> {
        self.vertex(v.as_str())?;
        if !self.random.contains(v) {
            return Err(Error::NotRandom { vertex: v.clone() });
        }
        Ok(self.closure(&VertexSet::from([v.clone()]), |w| &self.spouses[w]))
    }

    /// Partition of the random vertices into bidirected-connected components,
    /// ordered by least member.
    pub fn districts(&self) -> Vec<VertexSet> {
        let mut remaining = self.random.clone();
        let mut out = Vec::new();
        while let Some(v) = remaining.pop_first() {
            let d = self.closure(&VertexSet::from([v]), |w| &self.spouses[w]);
            for w in &d {
                remaining.remove(w);
            }
            out.push(d);
        }
        out
    }

    /// Whether `set` is nonempty and connected by bidirected edges between its
    /// own members.
    pub fn is_bidirected_connected(&self, set: &VertexSet) -> bool {
        let Some(start) = set.first() else {
            return false;
        };
        if !set.iter().all(|v| self.random.contains(v)) {
            return false;
        }
        let mut seen = VertexSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for w in &self.spouses[v] {
                if set.contains(w) && seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
        }
        seen.len() == set.len()
    }

    /// Subgraph on `set`, keeping random/fixed/hidden status and every edge
    /// with both endpoints inside.
    pub fn induced_subgraph(&self, set: &VertexSet) -> Result<MixedGraph> {
        self.require_known(set)?;
        let keep = |a: &Vertex, b: &Vertex| set.contains(a) && set.contains(b);
        Ok(MixedGraph::from_parts(
            set.clone(),
            self.fixed.intersection(set).cloned().collect(),
            self.hidden.intersection(set).cloned().collect(),
            self.directed
                .iter()
                .filter(|(a, b)| keep(a, b))
                .cloned()
                .collect(),
            self.bidirected
                .iter()
                .filter(|(a, b)| keep(a, b))
                .cloned()
                .collect(),
        ))
    }

    /// `outcomes` together with every vertex that has a directed path into
    /// `outcomes` avoiding `treatments` entirely.
    pub fn ancestral_avoiding(
        &self,
        outcomes: &VertexSet,
        treatments: &VertexSet,
    ) -> Result<VertexSet> {
        self.require_known(outcomes)?;
        self.require_known(treatments)?;
        if let Some(v) = outcomes.intersection(treatments).next() {
            return Err(Error::InvalidQuery(format!(
                "outcome intersects treatment at {v}"
            )));
        }
        let mut seen = outcomes.clone();
        let mut queue: VecDeque<&Vertex> = outcomes.iter().collect();
        while let Some(v) = queue.pop_front() {
            for p in &self.parents[v] {
                if !treatments.contains(p) && seen.insert(p.clone()) {
                    queue.push_back(p);
                }
            }
        }
        Ok(seen)
    }

    /// Random vertices that are parents of `v` or joined to it by a collider
    /// path, under the chosen reading. `v` itself is never included.
    pub fn collider_blanket(&self, v: &Vertex, reading: ColliderReading) -> Result<VertexSet> {
        self.vertex(v.as_str())?;
        if !self.random.contains(v) {
            return Err(Error::NotRandom { vertex: v.clone() });
        }
        let mut out: VertexSet = self.parents[v].clone();
        match reading {
            ColliderReading::Literal => collider_endpoints(self, v, 1, &mut out),
            ColliderReading::MultiEdge => collider_endpoints(self, v, 2, &mut out),
            ColliderReading::NonDescendant => {
                let mut keep = self.vertices.clone();
                for d in self.closure(&VertexSet::from([v.clone()]), |w| &self.children[w]) {
                    if &d != v {
                        keep.remove(&d);
                    }
                }
                let sub = self.induced_subgraph(&keep)?;
                collider_endpoints(&sub, v, 1, &mut out);
            }
        }
        out.remove(v);
        out.retain(|w| self.random.contains(w));
        Ok(out)
    }
}

/// Depth-first enumeration of simple collider paths starting at `v`,
/// recording endpoints of paths with at least `min_edges` edges.
fn collider_endpoints(g: &MixedGraph, v: &Vertex, min_edges: usize, out: &mut VertexSet) {
    // `arrow_in` records whether the edge used to reach the current vertex
    // has an arrowhead at it; only such vertices may continue as colliders.
    fn walk<'a>(
        g: &'a MixedGraph,
        cur: &'a Vertex,
        depth: usize,
        min_edges: usize,
        on_path: &mut BTreeSet<&'a Vertex>,
        out: &mut VertexSet,
    ) {
        // Continuing through `cur` needs an arrowhead at `cur` on the next edge
        // too: either a bidirected edge or an edge from a parent.
        let next = g.spouses[cur]
            .iter()
            .map(|w| (w, true))
            .chain(g.parents[cur].iter().map(|w| (w, false)));
        for (w, arrow_at_w) in next {
            if on_path.contains(w) {
                continue;
            }
            if depth + 1 >= min_edges {
                out.insert(w.clone());
            }
            if arrow_at_w {
                on_path.insert(w);
                walk(g, w, depth + 1, min_edges, on_path, out);
                on_path.remove(w);
            }
        }
    }

    let mut on_path = BTreeSet::from([v]);
    // First edge from v may leave in any direction.
    let first = g.spouses[v]
        .iter()
        .map(|w| (w, true))
        .chain(g.children[v].iter().map(|w| (w, true)))
        .chain(g.parents[v].iter().map(|w| (w, false)));
    for (w, arrow_at_w) in first {
        if min_edges <= 1 {
            out.insert(w.clone());
        }
        if arrow_at_w {
            on_path.insert(w);
            walk(g, w, 1, min_edges, &mut on_path, out);
            on_path.remove(w);
        }
    }
}
