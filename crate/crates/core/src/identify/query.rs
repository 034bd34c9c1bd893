use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::estimand::{fresh_symbol, Symbol};
use crate::graph::{MixedGraph, Vertex, VertexSet};

/// `p(Y | do(A = a))`, with a symbolic label for each treatment value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    outcomes: VertexSet,
    treatments: BTreeMap<Vertex, Symbol>,
}

impl Query {
    /// Labels default to the lowercase vertex name, primed on collision.
    pub fn new(outcomes: VertexSet, treatments: VertexSet) -> Result<Self> {
        let mut taken: BTreeSet<Symbol> = outcomes.iter().map(|v| v.as_str().to_string()).collect();
        let mut labels = BTreeMap::new();
        for a in treatments {
            let label = fresh_symbol(&a.as_str().to_lowercase(), &taken);
            taken.insert(label.clone());
            labels.insert(a, label);
        }
        Query::with_labels(outcomes, labels)
    }

    pub fn with_labels(outcomes: VertexSet, treatments: BTreeMap<Vertex, Symbol>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidQuery("no outcome given".into()));
        }
        if let Some(v) = outcomes.iter().find(|v| treatments.contains_key(*v)) {
            return Err(Error::InvalidQuery(format!(
                "outcome intersects treatment at {v}"
            )));
        }
        let mut seen: BTreeSet<&str> = outcomes.iter().map(Vertex::as_str).collect();
        for label in treatments.values() {
            if label.is_empty() || !seen.insert(label) {
                return Err(Error::InvalidQuery(format!(
                    "treatment label {label:?} is empty or already in use"
                )));
            }
        }
        Ok(Query {
            outcomes,
            treatments,
        })
    }

    /// Parses comma-separated vertex lists; the treatment list may be empty.
    pub fn parse(outcomes: &str, treatments: &str) -> Result<Self> {
        Query::new(parse_set(outcomes)?, parse_set(treatments)?)
    }

    pub fn outcomes(&self) -> &VertexSet {
        &self.outcomes
    }

    pub fn treatments(&self) -> VertexSet {
        self.treatments.keys().cloned().collect()
    }

    pub fn labels(&self) -> &BTreeMap<Vertex, Symbol> {
        &self.treatments
    }

    pub fn label(&self, a: &Vertex) -> Option<&str> {
        self.treatments.get(a).map(String::as_str)
    }

    pub fn is_treatment(&self, v: &Vertex) -> bool {
        self.treatments.contains_key(v)
    }

    /// Every mentioned vertex must be an observed random vertex of `g`.
    pub fn validate(&self, g: &MixedGraph) -> Result<()> {
        for v in self.outcomes.iter().chain(self.treatments.keys()) {
            g.vertex(v.as_str())?;
            if !g.is_random(v) || g.hidden().contains(v) {
                return Err(Error::InvalidQuery(format!(
                    "{v} is not an observed random vertex"
                )));
            }
        }
        Ok(())
    }
}

/// Splits `"A, B,C"` into a vertex set. Blank input gives the empty set.
pub fn parse_set(text: &str) -> Result<VertexSet> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(VertexSet::new());
    }
    let mut out = VertexSet::new();
    for part in text.split(',') {
        let v = Vertex::new(part.trim())?;
        if !out.insert(v.clone()) {
            return Err(Error::InvalidQuery(format!("{v} listed twice")));
        }
    }
    Ok(out)
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ys: Vec<&str> = self.outcomes.iter().map(Vertex::as_str).collect();
        if self.treatments.is_empty() {
            return write!(f, "p({})", ys.join(","));
        }
        let labels: Vec<&str> = self.treatments.values().map(String::as_str).collect();
        write!(f, "p({} | do({}))", ys.join(","), labels.join(","))
    }
}
