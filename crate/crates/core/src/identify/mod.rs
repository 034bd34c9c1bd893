//! The ID algorithm on ADMGs.
//!
//! `p(Y | do(a)) = sum_{Y* \ Y} prod_D q_D(D | pa(D) \ D)`, the product
//! running over the districts of the subgraph on `Y*`. Each kernel `q_D` is
//! synthesized by fixing `V \ D`; when some district cannot be reached, the
//! district and its reachable closure form a hedge.

mod hedge;
mod query;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::estimand::{fresh_symbol, simplify, Arg, Bound, Estimand, Expr, Symbol, Value};
use crate::fixing::{FixingSequence, SequenceSearch, Stuck};
use crate::graph::{fmt_set, ColliderReading, MixedGraph, Vertex, VertexSet};

pub use hedge::{check_hedge, find_hedge, is_hedge, CForest, HedgeDefect, HedgeWitness};
pub use query::{parse_set, Query};

/// Conditioning set used when dividing out the fixed vertex at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Conditioning {
    /// Random vertices that are not descendants of the vertex being fixed.
    #[default]
    NonDescendants,
    /// The collider blanket under the given reading.
    ColliderBlanket(ColliderReading),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentifyOptions {
    pub simplify: bool,
    pub conditioning: Conditioning,
}

impl Default for IdentifyOptions {
    fn default() -> Self {
        IdentifyOptions {
            simplify: true,
            conditioning: Conditioning::NonDescendants,
        }
    }
}

impl IdentifyOptions {
    /// Quotients of marginals exactly as synthesized.
    pub fn raw() -> Self {
        IdentifyOptions {
            simplify: false,
            ..Default::default()
        }
    }
}

/// A district of `G_{Y*}` and its context `pa(D) \ D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistrictContext {
    pub district: VertexSet,
    pub context: VertexSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub ystar: VertexSet,
    pub districts: Vec<DistrictContext>,
    /// Symbol for every vertex of `Y*` and every treatment: outcome names,
    /// treatment labels, and placeholder indices for `Y* \ Y`.
    pub symbols: BTreeMap<Vertex, Symbol>,
}

impl Decomposition {
    pub fn summed(&self, q: &Query) -> VertexSet {
        self.ystar.difference(q.outcomes()).cloned().collect()
    }
}

/// The identified kernel `q_D` with the fixing sequence that produced it and
/// the conditioning set used at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub district: VertexSet,
    pub sequence: FixingSequence,
    pub conditioning: Vec<VertexSet>,
    pub estimand: Estimand,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSearch {
    Identified(Kernel),
    NotReachable(Stuck),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentifiedDistrict {
    pub context: DistrictContext,
    pub kernel: Kernel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IdentificationResult {
    Identified {
        estimand: Estimand,
        ystar: VertexSet,
        districts: Vec<IdentifiedDistrict>,
    },
    NotIdentified {
        witness: HedgeWitness,
        failing_district: VertexSet,
        closure: VertexSet,
        /// Every district that is not intrinsic, in district order.
        failing_districts: Vec<VertexSet>,
        ystar: VertexSet,
        districts: Vec<DistrictContext>,
    },
}

impl IdentificationResult {
    pub fn is_identified(&self) -> bool {
        matches!(self, IdentificationResult::Identified { .. })
    }

    pub fn estimand(&self) -> Option<&Estimand> {
        match self {
            IdentificationResult::Identified { estimand, .. } => Some(estimand),
            IdentificationResult::NotIdentified { .. } => None,
        }
    }

    pub fn witness(&self) -> Option<&HedgeWitness> {
        match self {
            IdentificationResult::Identified { .. } => None,
            IdentificationResult::NotIdentified { witness, .. } => Some(witness),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let names = |s: &VertexSet| -> Vec<String> { s.iter().map(|v| v.to_string()).collect() };
        match self {
            IdentificationResult::Identified {
                estimand,
                ystar,
                districts,
            } => serde_json::json!({
                "status": "identified",
                "text": estimand.render_text(),
                "estimand": estimand.to_json_value(),
                "ystar": names(ystar),
                "districts": districts.iter().map(|d| serde_json::json!({
                    "district": names(&d.context.district),
                    "context": names(&d.context.context),
                    "sequence": d.kernel.sequence.steps().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                    "kernel": d.kernel.estimand.render_text(),
                })).collect::<Vec<_>>(),
            }),
            IdentificationResult::NotIdentified {
                witness,
                failing_district,
                closure,
                failing_districts,
                ystar,
                districts,
            } => serde_json::json!({
                "status": "not_identified",
                "witness": witness.to_json_value(),
                "failing_district": names(failing_district),
                "closure": names(closure),
                "ystar": names(ystar),
                "districts": districts.iter().map(|d| serde_json::json!({
                    "district": names(&d.district),
                    "context": names(&d.context),
                    "intrinsic": !failing_districts.contains(&d.district),
                })).collect::<Vec<_>>(),
            }),
        }
    }
}

fn require_admg(g: &MixedGraph) -> Result<()> {
    if !g.hidden().is_empty() || !g.fixed().is_empty() {
        return Err(Error::InvalidInput(
            "identification runs on an ADMG without hidden or fixed vertices; project first".into(),
        ));
    }
    Ok(())
}

/// Splits the query into districts of `G_{Y*}` with their contexts.
pub fn decompose(g: &MixedGraph, q: &Query) -> Result<Decomposition> {
    require_admg(g)?;
    q.validate(g)?;
    let a = q.treatments();
    let ystar = g.ancestral_avoiding(q.outcomes(), &a)?;
    let sub = g.induced_subgraph(&ystar)?;

    let mut taken: BTreeSet<Symbol> = q.labels().values().cloned().collect();
    taken.extend(q.outcomes().iter().map(|v| v.to_string()));
    let mut symbols: BTreeMap<Vertex, Symbol> = q.labels().clone();
    for v in &ystar {
        let s = if q.outcomes().contains(v) {
            v.to_string()
        } else {
            let s = fresh_symbol(&format!("_{}", v.as_str().to_lowercase()), &taken);
            taken.insert(s.clone());
            s
        };
        symbols.insert(v.clone(), s);
    }

    let mut districts = Vec::new();
    for d in sub.districts() {
        let context: VertexSet = g.parents(&d)?.difference(&d).cloned().collect();
        if let Some(v) = context
            .iter()
            .find(|v| !ystar.contains(*v) && !a.contains(*v))
        {
            return Err(Error::Internal(format!(
                "context vertex {v} of {} is neither in Y* nor treated",
                fmt_set(&d)
            )));
        }
        districts.push(DistrictContext {
            district: d,
            context,
        });
    }
    Ok(Decomposition {
        ystar,
        districts,
        symbols,
    })
}

/// Marginal of `k` over `over`, with fresh binders for the summed vertices.
fn marginalize(
    k: &Expr,
    over: &VertexSet,
    symbols: &BTreeMap<Vertex, Symbol>,
    taken: &mut BTreeSet<Symbol>,
) -> Expr {
    if over.is_empty() {
        return k.clone();
    }
    taken.extend(k.all_symbols());
    let mut map = BTreeMap::new();
    let mut bounds = Vec::with_capacity(over.len());
    for v in over {
        let fresh = fresh_symbol(&format!("_{}", v.as_str().to_lowercase()), taken);
        taken.insert(fresh.clone());
        map.insert(symbols[v].clone(), Value::Var(fresh.clone()));
        bounds.push(Bound::new(fresh, v.clone()));
    }
    Expr::marginal(bounds, k.substitute(&map))
}

/// Kernel `q_D(D | V \ D)` obtained by fixing `V \ D`, or the point where
/// fixing gets stuck.
pub fn identify_district(
    g: &MixedGraph,
    d: &VertexSet,
    options: IdentifyOptions,
) -> Result<KernelSearch> {
    require_admg(g)?;
    g.require_random(d)?;
    if !g.is_bidirected_connected(d) {
        return Err(Error::InvalidInput(format!(
            "{} is not bidirected-connected",
            fmt_set(d)
        )));
    }
    let rest: VertexSet = g.random().difference(d).cloned().collect();
    let sequence = match g.find_valid_sequence(&rest)? {
        SequenceSearch::Complete { sequence, .. } => sequence,
        SequenceSearch::Stuck(stuck) => return Ok(KernelSearch::NotReachable(stuck)),
    };

    let mut symbols = BTreeMap::new();
    let mut taken: BTreeSet<Symbol> = d.iter().map(|v| v.to_string()).collect();
    for v in g.vertices() {
        let s = if d.contains(v) {
            v.to_string()
        } else {
            let s = fresh_symbol(&v.as_str().to_lowercase(), &taken);
            taken.insert(s.clone());
            s
        };
        symbols.insert(v.clone(), s);
    }

    let joint: Vec<Arg> = g
        .vertices()
        .iter()
        .map(|v| Arg::var(v.clone(), symbols[v].clone()))
        .collect();
    let mut k = Expr::factor(joint, vec![]);
    let mut cur = g.clone();
    let mut conditioning = Vec::with_capacity(sequence.len());
    for j in sequence.steps() {
        let random = cur.random().clone();
        let cond: VertexSet = match options.conditioning {
            Conditioning::NonDescendants => {
                let de = cur.descendants(&VertexSet::from([j.clone()]))?;
                random.difference(&de).cloned().collect()
            }
            Conditioning::ColliderBlanket(reading) => cur.collider_blanket(j, reading)?,
        };
        let mut with_j = cond.clone();
        with_j.insert(j.clone());
        let num_over: VertexSet = random.difference(&with_j).cloned().collect();
        let den_over: VertexSet = random.difference(&cond).cloned().collect();
        let conditional = Expr::quotient(
            marginalize(&k, &num_over, &symbols, &mut taken),
            marginalize(&k, &den_over, &symbols, &mut taken),
        );
        k = Expr::quotient(k, conditional);
        if options.simplify {
            k = simplify(&k);
        }
        conditioning.push(cond);
        cur = cur.fix(j)?;
    }

    let outcomes = d
        .iter()
        .map(|v| Bound::new(symbols[v].clone(), v.clone()))
        .collect();
    let constants = g
        .vertices()
        .difference(d)
        .map(|v| Bound::new(symbols[v].clone(), v.clone()))
        .collect();
    let estimand = Estimand::new(outcomes, constants, k).prettified();
    estimand
        .ensure_well_formed()
        .map_err(|e| Error::Internal(format!("kernel for {}: {e}", fmt_set(d))))?;
    Ok(KernelSearch::Identified(Kernel {
        district: d.clone(),
        sequence,
        conditioning,
        estimand,
    }))
}

/// Runs the ID algorithm with default options.
pub fn identify(g: &MixedGraph, q: &Query) -> Result<IdentificationResult> {
    identify_with(g, q, IdentifyOptions::default())
}

pub fn identify_with(
    g: &MixedGraph,
    q: &Query,
    options: IdentifyOptions,
) -> Result<IdentificationResult> {
    let dec = decompose(g, q)?;
    let mut kernels = Vec::new();
    let mut failing = Vec::new();
    for dc in &dec.districts {
        match identify_district(g, &dc.district, options)? {
            KernelSearch::Identified(k) => kernels.push(IdentifiedDistrict {
                context: dc.clone(),
                kernel: k,
            }),
            KernelSearch::NotReachable(_) => failing.push(dc.district.clone()),
        }
    }

    if let Some(first) = failing.first().cloned() {
        let witness = find_hedge(g, q, &first)?;
        if let Err(defect) = check_hedge(g, q, &witness) {
            return Err(Error::Internal(format!(
                "constructed hedge for {} is invalid: {defect}",
                fmt_set(&first)
            )));
        }
        let closure = witness.outer.vertices.clone();
        return Ok(IdentificationResult::NotIdentified {
            witness,
            failing_district: first,
            closure,
            failing_districts: failing,
            ystar: dec.ystar,
            districts: dec.districts,
        });
    }

    let mut terms = Vec::with_capacity(kernels.len());
    for kd in &kernels {
        let ke = &kd.kernel.estimand;
        let mut map = BTreeMap::new();
        for b in ke.parameters() {
            let value = match dec.symbols.get(&b.vertex) {
                Some(s) => Value::Var(s.clone()),
                // Not a parent of the district: the kernel does not depend on
                // it, so any level will do.
                None => Value::Level(0),
            };
            map.insert(b.symbol.clone(), value);
        }
        terms.push(ke.expr.substitute(&map));
    }
    let summed: Vec<Bound> = dec
        .summed(q)
        .into_iter()
        .map(|v| Bound::new(dec.symbols[&v].clone(), v))
        .collect();
    let mut expr = Expr::sum(summed, Expr::product(terms));
    if options.simplify {
        expr = simplify(&expr);
    }
    let outcomes = q
        .outcomes()
        .iter()
        .map(|v| Bound::new(dec.symbols[v].clone(), v.clone()))
        .collect();
    let constants = q
        .labels()
        .iter()
        .map(|(v, s)| Bound::new(s.clone(), v.clone()))
        .collect();
    let estimand = Estimand::new(outcomes, constants, expr).prettified();
    estimand
        .ensure_well_formed()
        .map_err(|e| Error::Internal(format!("assembled estimand: {e}")))?;
    Ok(IdentificationResult::Identified {
        estimand,
        ystar: dec.ystar,
        districts: kernels,
    })
}

/// The three equivalent failure conditions, each computed independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FailureCharacterizations {
    pub hedge_exists: bool,
    pub some_district_not_intrinsic: bool,
    pub some_district_proper_closure: bool,
}

impl FailureCharacterizations {
    pub fn agree(&self) -> bool {
        self.hedge_exists == self.some_district_not_intrinsic
            && self.some_district_not_intrinsic == self.some_district_proper_closure
    }
}

pub fn failure_characterizations(g: &MixedGraph, q: &Query) -> Result<FailureCharacterizations> {
    let dec = decompose(g, q)?;
    let mut out = FailureCharacterizations {
        hedge_exists: false,
        some_district_not_intrinsic: false,
        some_district_proper_closure: false,
    };
    for dc in &dec.districts {
        let d = &dc.district;
        if !g.is_intrinsic(d)? {
            out.some_district_not_intrinsic = true;
            if let Ok(w) = find_hedge(g, q, d) {
                out.hedge_exists |= is_hedge(g, q, &w);
            }
        }
        let closure = g.reachable_closure(d)?;
        if d.is_subset(&closure) && closure.len() > d.len() {
            out.some_district_proper_closure = true;
        }
    }
    Ok(out)
}

/// Truncated factorization `sum_{V \ (Y ∪ A)} prod_{v ∉ A} p(v | pa(v))` for a
/// graph without bidirected edges.
pub fn g_formula(g: &MixedGraph, q: &Query) -> Result<Estimand> {
    require_admg(g)?;
    q.validate(g)?;
    if !g.bidirected_edges().is_empty() {
        return Err(Error::InvalidInput(
            "the g-formula needs a graph without bidirected edges".into(),
        ));
    }
    let a = q.treatments();
    let mut symbols: BTreeMap<Vertex, Symbol> = q.labels().clone();
    let mut taken: BTreeSet<Symbol> = symbols.values().cloned().collect();
    taken.extend(q.outcomes().iter().map(|v| v.to_string()));
    let mut summed = Vec::new();
    for v in g.vertices() {
        if q.outcomes().contains(v) {
            symbols.insert(v.clone(), v.to_string());
        } else if !a.contains(v) {
            let s = fresh_symbol(&format!("_{}", v.as_str().to_lowercase()), &taken);
            taken.insert(s.clone());
            symbols.insert(v.clone(), s.clone());
            summed.push(Bound::new(s, v.clone()));
        }
    }
    let arg = |v: &Vertex| Arg::var(v.clone(), symbols[v].clone());
    let terms = g
        .topological_order()
        .iter()
        .filter(|v| !a.contains(*v))
        .map(|v| Expr::factor(vec![arg(v)], g.parents_of(v).iter().map(arg).collect()))
        .collect();
    let outcomes = q
        .outcomes()
        .iter()
        .map(|v| Bound::new(v.to_string(), v.clone()))
        .collect();
    let constants = q
        .labels()
        .iter()
        .map(|(v, s)| Bound::new(s.clone(), v.clone()))
        .collect();
    Ok(Estimand::new(outcomes, constants, Expr::sum(summed, Expr::product(terms))).prettified())
}
