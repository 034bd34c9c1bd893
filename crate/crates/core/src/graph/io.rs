use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{MixedGraph, Vertex};
use crate::error::{Error, Result};

/// On-disk graph format. `hidden`, `fixed`, `directed` and `bidirected`
/// default to empty; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub hidden: Vec<String>,
    #[serde(default)]
    pub fixed: Vec<String>,
    #[serde(default)]
    pub directed: Vec<[String; 2]>,
    #[serde(default)]
    pub bidirected: Vec<[String; 2]>,
}

impl GraphJson {
    pub fn into_graph(self) -> Result<MixedGraph> {
        let mut b = MixedGraph::builder()
            .vertices(self.vertices)
            .hidden(self.hidden)
            .fixed(self.fixed);
        for [t, h] in self.directed {
            b = b.directed(t, h);
        }
        for [u, v] in self.bidirected {
            b = b.bidirected(u, v);
        }
        b.build()
    }
}

impl From<&MixedGraph> for GraphJson {
    fn from(g: &MixedGraph) -> Self {
        let names = |it: &mut dyn Iterator<Item = &Vertex>| -> Vec<String> {
            it.map(|v| v.as_str().to_string()).collect()
        };
        let pairs = |set: &std::collections::BTreeSet<(Vertex, Vertex)>| -> Vec<[String; 2]> {
            set.iter()
                .map(|(a, b)| [a.as_str().to_string(), b.as_str().to_string()])
                .collect()
        };
        GraphJson {
            vertices: names(&mut g.vertices.iter()),
            hidden: names(&mut g.hidden.iter()),
            fixed: names(&mut g.fixed.iter()),
            directed: pairs(&g.directed),
            bidirected: pairs(&g.bidirected),
        }
    }
}

impl MixedGraph {
    pub fn from_json(text: &str) -> Result<MixedGraph> {
        let raw: GraphJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        raw.into_graph()
    }

    /// Canonical JSON: sorted vertices and edges, two-space indentation,
    /// trailing newline. Equal graphs always produce identical bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&GraphJson::from(self)).expect("serializable");
        s.push('\n');
        s
    }

    /// Graphviz rendering. Fixed vertices are boxes, hidden vertices dashed
    /// circles, bidirected edges dashed double-headed arrows.
    pub fn to_dot(&self) -> String {
        self.to_dot_highlighting(&Default::default())
    }

    /// Like [`MixedGraph::to_dot`], filling the given vertices.
    pub fn to_dot_highlighting(&self, highlight: &super::VertexSet) -> String {
        let mut out = String::from("digraph G {\n");
        for v in &self.vertices {
            let mut attrs: Vec<&str> = Vec::new();
            if self.fixed.contains(v) {
                attrs.push("shape=box");
            }
            if self.hidden.contains(v) {
                attrs.push("style=dashed");
            }
            if highlight.contains(v) {
                attrs.push("style=filled");
                attrs.push("fillcolor=lightgrey");
            }
            if attrs.is_empty() {
                let _ = writeln!(out, "  \"{v}\";");
            } else {
                let _ = writeln!(out, "  \"{v}\" [{}];", attrs.join(", "));
            }
        }
        for (t, h) in &self.directed {
            let _ = writeln!(out, "  \"{t}\" -> \"{h}\";");
        }
        for (a, b) in &self.bidirected {
            let _ = writeln!(out, "  \"{a}\" -> \"{b}\" [dir=both, style=dashed];");
        }
        out.push_str("}\n");
        out
    }
}
