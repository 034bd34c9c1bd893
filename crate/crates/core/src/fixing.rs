//! The fixing calculus on conditional ADMGs.
//!
//! Fixing only ever deletes edges, and deleting an edge never makes a fixable
//! vertex unfixable, so a greedy search over fixable vertices never has to
//! backtrack: it either fixes the whole target set or gets stuck on a set that
//! no ordering could fix.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{MixedGraph, Vertex, VertexSet};

/// An ordered list of distinct vertices to fix.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FixingSequence(Vec<Vertex>);

impl FixingSequence {
    pub fn new(steps: Vec<Vertex>) -> Result<Self> {
        let distinct: VertexSet = steps.iter().cloned().collect();
        if distinct.len() != steps.len() {
            return Err(Error::InvalidInput(
                "fixing sequence repeats a vertex".into(),
            ));
        }
        Ok(FixingSequence(steps))
    }

    pub fn from_names<I>(names: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
    {
        let steps = names
            .into_iter()
            .map(|n| Vertex::new(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        FixingSequence::new(steps)
    }

    pub fn steps(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_set(&self) -> VertexSet {
        self.0.iter().cloned().collect()
    }
}

impl fmt::Display for FixingSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(Vertex::as_str).collect();
        write!(f, "<{}>", names.join(", "))
    }
}

/// Result of a greedy valid-sequence search.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceSearch {
    Complete {
        sequence: FixingSequence,
        graph: MixedGraph,
    },
    Stuck(Stuck),
}

/// Where a greedy search stopped: the vertices already fixed, the members of
/// the target set that could not be fixed, and the CADMG at that point.
#[derive(Debug, Clone, PartialEq)]
pub struct Stuck {
    pub sequence: FixingSequence,
    pub residual: VertexSet,
    pub graph: MixedGraph,
}

impl SequenceSearch {
    pub fn is_complete(&self) -> bool {
        matches!(self, SequenceSearch::Complete { .. })
    }

    pub fn sequence(&self) -> &FixingSequence {
        match self {
            SequenceSearch::Complete { sequence, .. } => sequence,
            SequenceSearch::Stuck(s) => &s.sequence,
        }
    }

    pub fn graph(&self) -> &MixedGraph {
        match self {
            SequenceSearch::Complete { graph, .. } => graph,
            SequenceSearch::Stuck(s) => &s.graph,
        }
    }
}

impl MixedGraph {
    /// A random vertex is fixable when none of its proper descendants lies in
    /// its district.
    pub fn is_fixable(&self, r: &Vertex) -> Result<bool> {
        let district = self.district_of(r)?;
        let descendants = self.descendants(&VertexSet::from([r.clone()]))?;
        Ok(descendants.intersection(&district).all(|w| w == r))
    }

    /// Fixes `r`: it becomes a fixed vertex and loses every edge with an
    /// arrowhead into it.
    pub fn fix(&self, r: &Vertex) -> Result<MixedGraph> {
        if !self.is_fixable(r)? {
            return Err(Error::NotFixable {
                vertex: r.clone(),
                step: 1,
            });
        }
        Ok(self.with_fixed_vertex(r))
    }

    /// Replays `sequence`, failing at the first step that is not fixable.
    /// Steps in the error are numbered from 1.
    pub fn fix_all(&self, sequence: &FixingSequence) -> Result<MixedGraph> {
        let mut g = self.clone();
        for (i, r) in sequence.steps().iter().enumerate() {
            g.vertex(r.as_str())?;
            if g.is_fixed(r) || !g.is_fixable(r)? {
                return Err(Error::NotFixable {
                    vertex: r.clone(),
                    step: i + 1,
                });
            }
            g = g.with_fixed_vertex(r);
        }
        Ok(g)
    }

    /// Greedily fixes the lexicographically least fixable member of `targets`
    /// until none is left or none is fixable.
    pub fn find_valid_sequence(&self, targets: &VertexSet) -> Result<SequenceSearch> {
        self.require_random(targets)?;
        let mut g = self.clone();
        let mut remaining = targets.clone();
        let mut steps = Vec::with_capacity(targets.len());
        loop {
            let mut next = None;
            for r in &remaining {
                if g.is_fixable(r)? {
                    next = Some(r.clone());
                    break;
                }
            }
            let Some(r) = next else { break };
            g = g.with_fixed_vertex(&r);
            remaining.remove(&r);
            steps.push(r);
        }
        let sequence = FixingSequence(steps);
        Ok(if remaining.is_empty() {
            SequenceSearch::Complete { sequence, graph: g }
        } else {
            SequenceSearch::Stuck(Stuck {
                sequence,
                residual: remaining,
                graph: g,
            })
        })
    }

    /// Smallest reachable superset of `set`: `set` plus every random vertex the
    /// greedy search fails to fix.
    pub fn reachable_closure(&self, set: &VertexSet) -> Result<VertexSet> {
        self.require_random(set)?;
        let complement: VertexSet = self.random().difference(set).cloned().collect();
        Ok(match self.find_valid_sequence(&complement)? {
            SequenceSearch::Complete { .. } => set.clone(),
            SequenceSearch::Stuck(stuck) => set.union(&stuck.residual).cloned().collect(),
        })
    }

    pub fn is_reachable(&self, set: &VertexSet) -> Result<bool> {
        Ok(self.reachable_closure(set)? == *set)
    }

    /// Reachable and bidirected-connected.
    pub fn is_intrinsic(&self, set: &VertexSet) -> Result<bool> {
        self.require_random(set)?;
        Ok(self.is_bidirected_connected(set) && self.is_reachable(set)?)
    }
}
