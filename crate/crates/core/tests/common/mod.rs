#![allow(dead_code)]

use std::collections::BTreeMap;

use causal_id::estimand::{Bound, Evaluator};
use causal_id::table::assignments;
use causal_id::{Estimand, MixedGraph, ProbTable, Scalar, Vertex, VertexSet};

pub fn set(names: &[&str]) -> VertexSet {
    causal_id::graph::vertex_set(names).unwrap()
}

pub fn v(name: &str) -> Vertex {
    Vertex::new(name).unwrap()
}

/// Every assignment of levels to the parameters of `e`, keyed by symbol.
pub fn bindings<T: Scalar>(joint: &ProbTable<T>, e: &Estimand) -> Vec<BTreeMap<String, usize>> {
    let params: Vec<&Bound> = e.parameters().collect();
    let cards: Vec<usize> = params
        .iter()
        .map(|b| joint.cardinality(&b.vertex).unwrap())
        .collect();
    assignments(&cards)
        .map(|levels| {
            params
                .iter()
                .zip(&levels)
                .map(|(b, &l)| (b.symbol.clone(), l))
                .collect()
        })
        .collect()
}

/// Largest pointwise gap between two estimands over the parameters of `a`.
pub fn max_gap(joint: &ProbTable<f64>, a: &Estimand, b: &Estimand) -> f64 {
    let ev = Evaluator::new(joint);
    let ta = ev.table(a).unwrap();
    let tb = ev.table(b).unwrap();
    bindings(joint, a)
        .iter()
        .map(|bd| (ta.get(bd).unwrap() - tb.get(bd).unwrap()).abs())
        .fold(0.0, f64::max)
}

/// All orderings of `items`.
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Outcome of fixing `j` in every order: the graphs produced by the valid
/// orders, and whether any order was valid.
pub fn exhaustive_fix(g: &MixedGraph, j: &VertexSet) -> Vec<MixedGraph> {
    let items: Vec<Vertex> = j.iter().cloned().collect();
    permutations(&items)
        .into_iter()
        .filter_map(|order| {
            let seq = causal_id::FixingSequence::new(order).unwrap();
            g.fix_all(&seq).ok()
        })
        .collect()
}

/// Checks that every valid order gives the same graph and that the greedy
/// search succeeds exactly when some order is valid, with the same result.
pub fn fixing_calculus_holds(g: &MixedGraph, j: &VertexSet) -> Result<(), String> {
    let graphs = exhaustive_fix(g, j);
    if let Some(first) = graphs.first() {
        if graphs.iter().any(|h| h != first) {
            return Err(format!("valid orders of {j:?} disagree"));
        }
    }
    let greedy = g.find_valid_sequence(j).unwrap();
    match (greedy.is_complete(), graphs.first()) {
        (true, Some(h)) if greedy.graph() == h => Ok(()),
        (false, None) => Ok(()),
        (c, h) => Err(format!(
            "greedy complete={c}, exhaustive found={} for {j:?}",
            h.is_some()
        )),
    }
}

/// A random subset of `pool` with at most `max` members.
pub fn random_subset<R: rand::Rng>(rng: &mut R, pool: &VertexSet, max: usize) -> VertexSet {
    use rand::seq::IteratorRandom;
    let k = rng.gen_range(0..=max.min(pool.len()));
    pool.iter()
        .cloned()
        .choose_multiple(rng, k)
        .into_iter()
        .collect()
}
