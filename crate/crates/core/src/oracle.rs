//! Ground truth from discrete structural causal models.
//!
//! A model is a DAG (hidden vertices allowed) with one conditional probability
//! table per vertex. Interventional distributions come from the truncated
//! factorization over all vertices, hidden ones included, so they are correct
//! by construction and independent of any identification result.
//!
//! # Seeded generator
//!
//! [`random_scm`] is part of the file-format contract, so results are portable:
//! a `ChaCha8Rng` seeded with `seed_from_u64(seed)` visits vertices in
//! lexicographic order and, within a vertex, CPT rows in row-major parent
//! order. For each row it draws one `f64` per level, `u_i = rng.gen::<f64>()`,
//! and sets `p_i = floor + (1 - k * floor) * u_i / sum(u)` with `floor = 1e-3`
//! and `k` the vertex cardinality (uniform when `sum(u) = 0`). The row is then
//! converted to the scalar type and divided by its sum.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimand::Evaluator;
use crate::graph::{GraphJson, MixedGraph, Vertex, VertexSet};
use crate::identify::{IdentificationResult, Query};
use crate::scalar::Scalar;
use crate::table::{assignments, strides, ProbTable};

/// Smallest probability the generator puts in any CPT cell before
/// normalization.
pub const CPT_FLOOR: f64 = 1e-3;

/// `p(v | pa(v))`, parents in lexicographic order, rows row-major over the
/// parents and the vertex's own level varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt<T> {
    pub parents: Vec<Vertex>,
    pub values: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteScm<T> {
    graph: MixedGraph,
    cards: BTreeMap<Vertex, usize>,
    cpts: BTreeMap<Vertex, Cpt<T>>,
}

fn check_dag(g: &MixedGraph) -> Result<()> {
    if !g.bidirected_edges().is_empty() || !g.fixed().is_empty() {
        return Err(Error::InvalidInput(
            "a structural model needs a DAG without fixed vertices".into(),
        ));
    }
    Ok(())
}

fn check_cards(g: &MixedGraph, cards: &BTreeMap<Vertex, usize>) -> Result<()> {
    for v in g.vertices() {
        match cards.get(v) {
            Some(&c) if c >= 2 => {}
            Some(&c) => {
                return Err(Error::InvalidInput(format!(
                    "cardinality of {v} is {c}, must be at least 2"
                )))
            }
            None => return Err(Error::InvalidInput(format!("no cardinality for {v}"))),
        }
    }
    if let Some(v) = cards.keys().find(|v| !g.vertices().contains(*v)) {
        return Err(Error::UnknownVertex(v.to_string()));
    }
    Ok(())
}

/// Same cardinality for every vertex.
pub fn uniform_cards(g: &MixedGraph, card: usize) -> BTreeMap<Vertex, usize> {
    g.vertices().iter().map(|v| (v.clone(), card)).collect()
}

/// Seeded random model; see the module docs for the exact algorithm.
pub fn random_scm<T: Scalar>(
    g: &MixedGraph,
    cards: &BTreeMap<Vertex, usize>,
    seed: u64,
) -> Result<DiscreteScm<T>> {
    check_dag(g)?;
    check_cards(g, cards)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cpts = BTreeMap::new();
    for v in g.vertices() {
        let parents: Vec<Vertex> = g.parents_of(v).iter().cloned().collect();
        let k = cards[v];
        let rows: usize = parents.iter().map(|p| cards[p]).product();
        let mut values = Vec::with_capacity(rows * k);
        for _ in 0..rows {
            let u: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
            let total: f64 = u.iter().sum();
            let row: Vec<T> = u
                .iter()
                .map(|&x| {
                    let share = if total > 0.0 {
                        x / total
                    } else {
                        1.0 / k as f64
                    };
                    T::from_probability(CPT_FLOOR + (1.0 - k as f64 * CPT_FLOOR) * share)
                })
                .collect();
            let sum = row.iter().fold(T::zero(), |acc, x| acc + x.clone());
            values.extend(row.into_iter().map(|x| x / sum.clone()));
        }
        cpts.insert(v.clone(), Cpt { parents, values });
    }
    Ok(DiscreteScm {
        graph: g.clone(),
        cards: cards.clone(),
        cpts,
    })
}

impl<T: Scalar> DiscreteScm<T> {
    /// Builds a model from explicit tables, checking shapes, row sums
    /// (within `1e-12`) and nonnegativity.
    pub fn new(
        graph: MixedGraph,
        cards: BTreeMap<Vertex, usize>,
        cpts: BTreeMap<Vertex, Vec<T>>,
    ) -> Result<Self> {
        check_dag(&graph)?;
        check_cards(&graph, &cards)?;
        let tol = T::from_f64(1e-12).expect("tolerance");
        let mut out = BTreeMap::new();
        for v in graph.vertices() {
            let values = cpts
                .get(v)
                .ok_or_else(|| Error::InvalidInput(format!("no table for {v}")))?
                .clone();
            let parents: Vec<Vertex> = graph.parents_of(v).iter().cloned().collect();
            let k = cards[v];
            let rows: usize = parents.iter().map(|p| cards[p]).product();
            if values.len() != rows * k {
                return Err(Error::InvalidInput(format!(
                    "table for {v} has {} entries, expected {}",
                    values.len(),
                    rows * k
                )));
            }
            for row in values.chunks(k) {
                let sum = row.iter().fold(T::zero(), |acc, x| acc + x.clone());
                if row.iter().any(|x| x.is_negative()) || (sum - T::one()).abs() > tol {
                    return Err(Error::InvalidInput(format!(
                        "a row of the table for {v} is not a distribution"
                    )));
                }
            }
            out.insert(v.clone(), Cpt { parents, values });
        }
        if let Some(v) = cpts.keys().find(|v| !graph.vertices().contains(*v)) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        Ok(DiscreteScm {
            graph,
            cards,
            cpts: out,
        })
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.graph
    }

    pub fn cardinalities(&self) -> &BTreeMap<Vertex, usize> {
        &self.cards
    }

    pub fn cpt(&self, v: &Vertex) -> Option<&Cpt<T>> {
        self.cpts.get(v)
    }

    fn cpt_value(&self, v: &Vertex, levels: &BTreeMap<&Vertex, usize>) -> T {
        let cpt = &self.cpts[v];
        let mut idx = 0;
        for p in &cpt.parents {
            idx = idx * self.cards[p] + levels[p];
        }
        cpt.values[idx * self.cards[v] + levels[v]].clone()
    }

    /// `sum over everything but keep` of `prod_{v not in skip} p(v | pa(v))`,
    /// with `fixed` vertices clamped.
    fn truncated(&self, keep: &VertexSet, fixed: &BTreeMap<Vertex, usize>) -> Result<ProbTable<T>> {
        for (v, &l) in fixed {
            let card = *self
                .cards
                .get(v)
                .ok_or_else(|| Error::UnknownVertex(v.to_string()))?;
            if l >= card {
                return Err(Error::InvalidInput(format!(
                    "level {l} out of range for {v}"
                )));
            }
        }
        if let Some(v) = keep.iter().find(|v| !self.graph.vertices().contains(*v)) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        let free: Vec<&Vertex> = self
            .graph
            .vertices()
            .iter()
            .filter(|v| !fixed.contains_key(*v))
            .collect();
        let free_cards: Vec<usize> = free.iter().map(|v| self.cards[*v]).collect();
        let kept: Vec<Vertex> = keep.iter().cloned().collect();
        let kept_cards: Vec<usize> = kept.iter().map(|v| self.cards[v]).collect();
        let kept_strides = strides(&kept_cards);
        let mut values = vec![T::zero(); kept_cards.iter().product()];

        let mut levels: BTreeMap<&Vertex, usize> = fixed.iter().map(|(v, &l)| (v, l)).collect();
        for a in assignments(&free_cards) {
            for (v, &l) in free.iter().zip(&a) {
                levels.insert(v, l);
            }
            let mut p = T::one();
            for v in &free {
                p = p * self.cpt_value(v, &levels);
            }
            let idx: usize = kept
                .iter()
                .zip(&kept_strides)
                .map(|(v, s)| levels[v] * s)
                .sum();
            values[idx] = values[idx].clone() + p;
        }
        ProbTable::new(kept, kept_cards, values)
    }

    /// Joint over every vertex, hidden ones included.
    pub fn full_joint(&self) -> ProbTable<T> {
        self.truncated(self.graph.vertices(), &BTreeMap::new())
            .expect("own vertices")
    }

    /// Joint over the observed vertices.
    pub fn observed_joint(&self) -> ProbTable<T> {
        self.truncated(&self.graph.observed(), &BTreeMap::new())
            .expect("own vertices")
    }

    /// `p(Y | do(A = a))` by the truncated factorization.
    pub fn interventional(
        &self,
        treatment: &BTreeMap<Vertex, usize>,
        outcomes: &VertexSet,
    ) -> Result<ProbTable<T>> {
        if let Some(v) = outcomes.iter().find(|v| treatment.contains_key(*v)) {
            return Err(Error::InvalidQuery(format!(
                "outcome intersects treatment at {v}"
            )));
        }
        self.truncated(outcomes, treatment)
    }
}

/// Outcome of comparing an estimand with the oracle at every point.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// Number of (outcome, treatment) value combinations compared.
    pub points: usize,
    pub max_abs_deviation: f64,
    pub passed: bool,
}

/// Compares an identified estimand, evaluated on the model's observed joint,
/// with the model's interventional distribution over all outcome and
/// treatment values. `admg` must be the latent projection of the model's graph.
pub fn verify<T: Scalar>(
    scm: &DiscreteScm<T>,
    admg: &MixedGraph,
    q: &Query,
    result: &IdentificationResult,
    tol: f64,
) -> Result<VerificationReport> {
    let projected = scm.graph().latent_project()?;
    if &projected != admg {
        return Err(Error::InvalidInput(
            "the model's latent projection differs from the graph that was identified".into(),
        ));
    }
    let estimand = result
        .estimand()
        .ok_or_else(|| Error::InvalidInput("not identified; nothing to verify".into()))?;
    let observed = scm.observed_joint();
    let table = Evaluator::new(&observed).table(estimand)?;

    let treatments: Vec<&Vertex> = q.labels().keys().collect();
    let a_cards: Vec<usize> = treatments.iter().map(|v| scm.cards[*v]).collect();
    let outcomes: Vec<&Vertex> = q.outcomes().iter().collect();
    let mut worst = T::zero();
    let mut points = 0;
    for a in assignments(&a_cards) {
        let clamp: BTreeMap<Vertex, usize> = treatments
            .iter()
            .zip(&a)
            .map(|(v, &l)| ((*v).clone(), l))
            .collect();
        let truth = scm.interventional(&clamp, q.outcomes())?;
        for (cell, y) in assignments(truth.cards()).enumerate() {
            let mut binding: BTreeMap<String, usize> = BTreeMap::new();
            for (v, &l) in outcomes.iter().zip(&y) {
                let b = estimand
                    .outcomes
                    .iter()
                    .find(|b| &&b.vertex == v)
                    .ok_or_else(|| Error::Internal(format!("no outcome symbol for {v}")))?;
                binding.insert(b.symbol.clone(), l);
            }
            for (v, &l) in &clamp {
                binding.insert(q.label(v).expect("treatment label").to_string(), l);
            }
            let got = table.get(&binding)?;
            let d = (got - truth.values()[cell].clone()).abs();
            if d > worst {
                worst = d;
            }
            points += 1;
        }
    }
    let max_abs_deviation = worst.to_f64_lossy();
    Ok(VerificationReport {
        points,
        max_abs_deviation,
        passed: max_abs_deviation <= tol,
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScmJson {
    vertices: Vec<String>,
    #[serde(default)]
    hidden: Vec<String>,
    #[serde(default)]
    directed: Vec<[String; 2]>,
    cardinalities: BTreeMap<Vertex, usize>,
    cpts: BTreeMap<Vertex, Vec<f64>>,
}

impl DiscreteScm<f64> {
    /// Graph fields plus `cardinalities` and `cpts`.
    pub fn to_json(&self) -> String {
        let g = GraphJson::from(&self.graph);
        let raw = ScmJson {
            vertices: g.vertices,
            hidden: g.hidden,
            directed: g.directed,
            cardinalities: self.cards.clone(),
            cpts: self
                .cpts
                .iter()
                .map(|(v, c)| (v.clone(), c.values.clone()))
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ScmJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let graph = GraphJson {
            vertices: raw.vertices,
            hidden: raw.hidden,
            fixed: Vec::new(),
            directed: raw.directed,
            bidirected: Vec::new(),
        }
        .into_graph()?;
        DiscreteScm::new(graph, raw.cardinalities, raw.cpts)
    }
}
