//! Seeded random graphs and queries for property tests and sweeps.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{MixedGraph, Vertex, VertexSet};
use crate::identify::Query;

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// ADMG on `V0..V{n-1}`. A random permutation fixes the causal order; each
/// forward pair gets a directed edge with probability `p_directed` and each
/// pair a bidirected edge with probability `p_bidirected`.
pub fn random_admg<R: Rng>(
    rng: &mut R,
    n: usize,
    p_directed: f64,
    p_bidirected: f64,
) -> MixedGraph {
    let vs = names("V", n);
    let mut order = vs.clone();
    order.shuffle(rng);
    let mut b = MixedGraph::builder().vertices(vs.iter().cloned());
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p_directed) {
                b = b.directed(order[i].clone(), order[j].clone());
            }
            if rng.gen_bool(p_bidirected) {
                b = b.bidirected(order[i].clone(), order[j].clone());
            }
        }
    }
    b.build().expect("edges follow a topological order")
}

/// DAG with observed `V0..` and hidden `H0..`. Observed vertices are ordered
/// by a random permutation with forward edges of probability `p_directed`;
/// each hidden vertex is a root with two or three observed children.
pub fn random_hidden_dag<R: Rng>(
    rng: &mut R,
    observed: usize,
    hidden: usize,
    p_directed: f64,
) -> MixedGraph {
    let vs = names("V", observed);
    let hs = names("H", hidden);
    let mut order = vs.clone();
    order.shuffle(rng);
    let mut b = MixedGraph::builder()
        .vertices(vs.iter().cloned())
        .vertices(hs.iter().cloned())
        .hidden(hs.iter().cloned());
    for i in 0..observed {
        for j in i + 1..observed {
            if rng.gen_bool(p_directed) {
                b = b.directed(order[i].clone(), order[j].clone());
            }
        }
    }
    for h in &hs {
        let k = rng.gen_range(2..=3usize).min(observed);
        for child in vs.choose_multiple(rng, k) {
            b = b.directed(h.clone(), child.clone());
        }
    }
    b.build().expect("hidden vertices are roots")
}

/// Nonempty outcome set and a disjoint, possibly empty, treatment set drawn
/// from `candidates`.
pub fn random_query<R: Rng>(rng: &mut R, candidates: &VertexSet) -> Query {
    let mut pool: Vec<Vertex> = candidates.iter().cloned().collect();
    pool.shuffle(rng);
    let n_out = rng.gen_range(1..=2usize.min(pool.len()));
    let max_treat = (pool.len() - n_out).min(3);
    let n_treat = rng.gen_range(0..=max_treat);
    let outcomes: VertexSet = pool[..n_out].iter().cloned().collect();
    let treatments: VertexSet = pool[n_out..n_out + n_treat].iter().cloned().collect();
    Query::new(outcomes, treatments).expect("disjoint and nonempty")
}
