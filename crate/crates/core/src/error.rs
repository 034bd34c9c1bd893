use thiserror::Error;

use crate::graph::Vertex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid vertex name {0:?}")]
    InvalidName(String),

    #[error("duplicate vertex {0}")]
    DuplicateVertex(Vertex),

    #[error("unknown vertex {0}")]
    UnknownVertex(String),

    #[error("self-loop on {0}")]
    SelfLoop(Vertex),

    #[error("duplicate edge {0}")]
    DuplicateEdge(String),

    #[error("cycle detected: {}", format_cycle(.0))]
    Cycle(Vec<Vertex>),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("{vertex} not fixable at step {step}")]
    NotFixable { vertex: Vertex, step: usize },

    #[error("{vertex} is fixed, expected a random vertex")]
    NotRandom { vertex: Vertex },

    #[error("malformed estimand: {0}")]
    MalformedEstimand(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

fn format_cycle(cycle: &[Vertex]) -> String {
    let mut names: Vec<&str> = cycle.iter().map(Vertex::as_str).collect();
    if let Some(first) = cycle.first() {
        names.push(first.as_str());
    }
    names.join(" -> ")
}
