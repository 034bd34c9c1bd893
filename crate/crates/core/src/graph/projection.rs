use std::collections::{BTreeMap, BTreeSet};

use super::{MixedGraph, Vertex, VertexSet};
use crate::error::{Error, Result};

impl MixedGraph {
    /// Latent projection onto the observed vertices.
    ///
    /// `u -> w` survives when `u` reaches `w` by a directed path whose interior
    /// is hidden; `u <-> w` appears when some hidden vertex reaches both `u` and
    /// `w` along such paths (the only shape a collider-free, non-directed path
    /// with hidden interior can take in a DAG).
    pub fn latent_project(&self) -> Result<MixedGraph> {
        if !self.bidirected.is_empty() || !self.fixed.is_empty() {
            return Err(Error::InvalidInput(
                "latent projection needs a DAG without bidirected edges or fixed vertices".into(),
            ));
        }
        let mut reach: BTreeMap<&Vertex, VertexSet> = BTreeMap::new();
        // Reverse topological order so every hidden child is resolved first.
        for v in self.topological_order().iter().rev() {
            let v = self.vertices.get(v).expect("vertex");
            let mut out = VertexSet::new();
            for c in &self.children[v] {
                if self.hidden.contains(c) {
                    out.extend(reach[c].iter().cloned());
                } else {
                    out.insert(c.clone());
                }
            }
            reach.insert(v, out);
        }

        let observed = self.observed();
        let mut directed = BTreeSet::new();
        for u in &observed {
            for w in &reach[u] {
                directed.insert((u.clone(), w.clone()));
            }
        }
        let mut bidirected = BTreeSet::new();
        for h in &self.hidden {
            let targets: Vec<&Vertex> = reach[h].iter().collect();
            for (i, a) in targets.iter().enumerate() {
                for b in &targets[i + 1..] {
                    bidirected.insert(((*a).clone(), (*b).clone()));
                }
            }
        }
        Ok(MixedGraph::from_parts(
            observed,
            VertexSet::new(),
            VertexSet::new(),
            directed,
            bidirected,
        ))
    }
}
