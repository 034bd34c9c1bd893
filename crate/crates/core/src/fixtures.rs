//! The five small graphs used throughout the tests and shipped under
//! `fixtures/` as `fig1a.json` ... `fig1e.json`.

use crate::graph::MixedGraph;

/// `fig1a`: A1 -> L -> A2 -> Y with A1 -> A2, L -> Y, A1 -> Y. Fully observed.
pub fn four_variable_dag() -> MixedGraph {
    MixedGraph::builder()
        .vertices(["A1", "L", "A2", "Y"])
        .directed("A1", "L")
        .directed("L", "A2")
        .directed("A2", "Y")
        .directed("A1", "A2")
        .directed("L", "Y")
        .directed("A1", "Y")
        .build()
        .expect("valid fixture")
}

/// `fig1b`: hidden-variable DAG where p(Y | do(a1, a2)) is identified but
/// p(Y | do(a2)) is not.
pub fn hedge_counterexample_dag() -> MixedGraph {
    MixedGraph::builder()
        .vertices(["A1", "W", "A2", "Y", "H1", "H2"])
        .hidden(["H1", "H2"])
        .directed("A1", "Y")
        .directed("A2", "Y")
        .directed("W", "A1")
        .directed("H2", "W")
        .directed("H2", "A2")
        .directed("H1", "W")
        .directed("H1", "Y")
        .build()
        .expect("valid fixture")
}

/// `fig1c`: latent projection of [`hedge_counterexample_dag`].
pub fn hedge_counterexample_admg() -> MixedGraph {
    MixedGraph::builder()
        .vertices(["A1", "W", "A2", "Y"])
        .directed("W", "A1")
        .directed("A1", "Y")
        .directed("A2", "Y")
        .bidirected("W", "A2")
        .bidirected("W", "Y")
        .build()
        .expect("valid fixture")
}

/// `fig1d`: the front-door model with a measured common cause C.
pub fn front_door() -> MixedGraph {
    MixedGraph::builder()
        .vertices(["A", "M", "Y", "C"])
        .directed("C", "A")
        .directed("C", "M")
        .directed("C", "Y")
        .directed("A", "M")
        .directed("M", "Y")
        .bidirected("A", "Y")
        .build()
        .expect("valid fixture")
}

/// `fig1e`: [`front_door`] restricted to {C, M, Y}.
pub fn front_door_outcome_subgraph() -> MixedGraph {
    MixedGraph::builder()
        .vertices(["M", "C", "Y"])
        .directed("C", "M")
        .directed("C", "Y")
        .directed("M", "Y")
        .build()
        .expect("valid fixture")
}

/// A hidden-variable DAG whose projection is [`front_door`]; used wherever
/// ground truth is needed for the front-door fixture.
pub fn front_door_dag() -> MixedGraph {
    MixedGraph::builder()
        .vertices(["A", "M", "Y", "C", "U"])
        .hidden(["U"])
        .directed("C", "A")
        .directed("C", "M")
        .directed("C", "Y")
        .directed("A", "M")
        .directed("M", "Y")
        .directed("U", "A")
        .directed("U", "Y")
        .build()
        .expect("valid fixture")
}
