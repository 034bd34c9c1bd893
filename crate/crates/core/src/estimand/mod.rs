//! Symbolic functionals of the observed joint distribution.
//!
//! A [`Factor`] is a conditional `p(S | C)` of the joint; every slot names a
//! vertex and either a variable symbol or a literal level. Symbols are bound by
//! [`Expr::Sum`] / [`Expr::Marginal`] or listed as free parameters of the
//! enclosing [`Estimand`].

mod eval;
mod json;
mod render;
mod simplify;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::Vertex;

pub use eval::{EstimandTable, Evaluator};
pub use json::SCHEMA_VERSION;
pub use render::{render_latex, render_text};
pub use simplify::simplify;

pub type Symbol = String;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Var(Symbol),
    Level(usize),
}

/// One slot of a factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arg {
    pub vertex: Vertex,
    pub value: Value,
}

impl Arg {
    pub fn var(vertex: Vertex, symbol: impl Into<Symbol>) -> Self {
        Arg {
            vertex,
            value: Value::Var(symbol.into()),
        }
    }

    pub fn level(vertex: Vertex, level: usize) -> Self {
        Arg {
            vertex,
            value: Value::Level(level),
        }
    }

    pub fn symbol(&self) -> Option<&str> {
        match &self.value {
            Value::Var(s) => Some(s),
            Value::Level(_) => None,
        }
    }
}

/// `p(targets | given)` computed from the observed joint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factor {
    pub targets: Vec<Arg>,
    pub given: Vec<Arg>,
}

/// A symbol together with the vertex whose levels it ranges over.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bound {
    pub symbol: Symbol,
    pub vertex: Vertex,
}

impl Bound {
    pub fn new(symbol: impl Into<Symbol>, vertex: Vertex) -> Self {
        Bound {
            symbol: symbol.into(),
            vertex,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Factor(Factor),
    /// n-ary product; the empty product is 1.
    Product(Vec<Expr>),
    Quotient(Box<Expr>, Box<Expr>),
    Sum {
        over: Vec<Bound>,
        body: Box<Expr>,
    },
    /// Same semantics as `Sum`; marks sums that marginalize a kernel.
    Marginal {
        over: Vec<Bound>,
        body: Box<Expr>,
    },
}

/// A closed expression plus the free parameters it may mention: outcome
/// variables and constants (treatment values, or fixed vertices of a kernel).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Estimand {
    pub outcomes: Vec<Bound>,
    pub constants: Vec<Bound>,
    pub expr: Expr,
}

impl Expr {
    pub fn one() -> Expr {
        Expr::Product(Vec::new())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Product(ts) if ts.is_empty())
    }

    pub fn factor(targets: Vec<Arg>, given: Vec<Arg>) -> Expr {
        Expr::Factor(Factor { targets, given })
    }

    pub fn product(terms: Vec<Expr>) -> Expr {
        let mut terms: Vec<Expr> = terms.into_iter().filter(|t| !t.is_one()).collect();
        if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            Expr::Product(terms)
        }
    }

    pub fn quotient(num: Expr, den: Expr) -> Expr {
        Expr::Quotient(Box::new(num), Box::new(den))
    }

    pub fn sum(over: Vec<Bound>, body: Expr) -> Expr {
        if over.is_empty() {
            body
        } else {
            Expr::Sum {
                over,
                body: Box::new(body),
            }
        }
    }

    pub fn marginal(over: Vec<Bound>, body: Expr) -> Expr {
        if over.is_empty() {
            body
        } else {
            Expr::Marginal {
                over,
                body: Box::new(body),
            }
        }
    }

    /// Free symbols, with the vertex each one is attached to.
    pub fn free_symbols(&self) -> BTreeMap<Symbol, Vertex> {
        let mut out = BTreeMap::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Symbol>, out: &mut BTreeMap<Symbol, Vertex>) {
        match self {
            Expr::Factor(f) => {
                for a in f.targets.iter().chain(&f.given) {
                    if let Value::Var(s) = &a.value {
                        if !bound.contains(s) {
                            out.entry(s.clone()).or_insert_with(|| a.vertex.clone());
                        }
                    }
                }
            }
            Expr::Product(ts) => ts.iter().for_each(|t| t.collect_free(bound, out)),
            Expr::Quotient(n, d) => {
                n.collect_free(bound, out);
                d.collect_free(bound, out);
            }
            Expr::Sum { over, body } | Expr::Marginal { over, body } => {
                let before = bound.len();
                bound.extend(over.iter().map(|b| b.symbol.clone()));
                body.collect_free(bound, out);
                bound.truncate(before);
            }
        }
    }

    pub fn mentions(&self, symbol: &str) -> bool {
        self.free_symbols().contains_key(symbol)
    }

    /// Every symbol occurring anywhere, bound or free.
    pub fn all_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.visit_symbols(&mut |s| {
            out.insert(s.to_string());
        });
        out
    }

    fn visit_symbols(&self, f: &mut impl FnMut(&str)) {
        match self {
            Expr::Factor(fa) => {
                for a in fa.targets.iter().chain(&fa.given) {
                    if let Value::Var(s) = &a.value {
                        f(s);
                    }
                }
            }
            Expr::Product(ts) => ts.iter().for_each(|t| t.visit_symbols(f)),
            Expr::Quotient(n, d) => {
                n.visit_symbols(f);
                d.visit_symbols(f);
            }
            Expr::Sum { over, body } | Expr::Marginal { over, body } => {
                over.iter().for_each(|b| f(&b.symbol));
                body.visit_symbols(f);
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Factor(_) => 1,
            Expr::Product(ts) => 1 + ts.iter().map(Expr::size).sum::<usize>(),
            Expr::Quotient(n, d) => 1 + n.size() + d.size(),
            Expr::Sum { body, .. } | Expr::Marginal { body, .. } => 1 + body.size(),
        }
    }

    /// Capture-avoiding substitution of free symbols.
    pub fn substitute(&self, map: &BTreeMap<Symbol, Value>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Expr::Factor(f) => {
                let sub = |a: &Arg| match &a.value {
                    Value::Var(s) => match map.get(s) {
                        Some(v) => Arg {
                            vertex: a.vertex.clone(),
                            value: v.clone(),
                        },
                        None => a.clone(),
                    },
                    Value::Level(_) => a.clone(),
                };
                Expr::Factor(Factor {
                    targets: f.targets.iter().map(sub).collect(),
                    given: f.given.iter().map(sub).collect(),
                })
            }
            Expr::Product(ts) => Expr::Product(ts.iter().map(|t| t.substitute(map)).collect()),
            Expr::Quotient(n, d) => Expr::quotient(n.substitute(map), d.substitute(map)),
            Expr::Sum { over, body } | Expr::Marginal { over, body } => {
                let mut inner = map.clone();
                for b in over {
                    inner.remove(&b.symbol);
                }
                let incoming: BTreeSet<Symbol> = inner
                    .values()
                    .filter_map(|v| match v {
                        Value::Var(s) => Some(s.clone()),
                        Value::Level(_) => None,
                    })
                    .collect();
                let mut avoid = body.all_symbols();
                avoid.extend(incoming.iter().cloned());
                avoid.extend(inner.keys().cloned());
                let mut renamed = Vec::with_capacity(over.len());
                for b in over {
                    if incoming.contains(&b.symbol) {
                        let fresh = fresh_symbol(&b.symbol, &avoid);
                        avoid.insert(fresh.clone());
                        inner.insert(b.symbol.clone(), Value::Var(fresh.clone()));
                        renamed.push(Bound::new(fresh, b.vertex.clone()));
                    } else {
                        renamed.push(b.clone());
                    }
                }
                let body = Box::new(body.substitute(&inner));
                match self {
                    Expr::Sum { .. } => Expr::Sum {
                        over: renamed,
                        body,
                    },
                    _ => Expr::Marginal {
                        over: renamed,
                        body,
                    },
                }
            }
        }
    }

    /// Renames every binder to the lowercase name of its vertex, adding primes
    /// until it is distinct from all symbols in scope.
    pub fn prettify_binders(&self, scope: &BTreeSet<Symbol>) -> Expr {
        match self {
            Expr::Factor(_) => self.clone(),
            Expr::Product(ts) => {
                Expr::Product(ts.iter().map(|t| t.prettify_binders(scope)).collect())
            }
            Expr::Quotient(n, d) => {
                Expr::quotient(n.prettify_binders(scope), d.prettify_binders(scope))
            }
            Expr::Sum { over, body } | Expr::Marginal { over, body } => {
                let mut inner_scope = scope.clone();
                let mut map = BTreeMap::new();
                let mut renamed = Vec::with_capacity(over.len());
                for b in over {
                    let name = fresh_symbol(&b.vertex.as_str().to_lowercase(), &inner_scope);
                    inner_scope.insert(name.clone());
                    if name != b.symbol {
                        map.insert(b.symbol.clone(), Value::Var(name.clone()));
                    }
                    renamed.push(Bound::new(name, b.vertex.clone()));
                }
                // One simultaneous, capture-avoiding substitution: new names
                // may coincide with old binder names.
                let body = body.substitute(&map).prettify_binders(&inner_scope);
                match self {
                    Expr::Sum { .. } => Expr::Sum {
                        over: renamed,
                        body: Box::new(body),
                    },
                    _ => Expr::Marginal {
                        over: renamed,
                        body: Box::new(body),
                    },
                }
            }
        }
    }
}

/// `base`, or `base` with enough trailing primes to avoid `taken`.
pub fn fresh_symbol(base: &str, taken: &BTreeSet<Symbol>) -> Symbol {
    let mut name = base.trim_end_matches('\'').to_string();
    if name.is_empty() {
        name.push('x');
    }
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// First problem found by [`Estimand::check`], with the path to the node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl Estimand {
    pub fn new(outcomes: Vec<Bound>, constants: Vec<Bound>, expr: Expr) -> Self {
        Estimand {
            outcomes,
            constants,
            expr,
        }
    }

    /// Free parameters: outcomes followed by constants.
    pub fn parameters(&self) -> impl Iterator<Item = &Bound> {
        self.outcomes.iter().chain(&self.constants)
    }

    pub fn well_formed(&self) -> bool {
        self.check().is_ok()
    }

    /// Scope and binding check. Every symbol must be bound exactly once on its
    /// path (no shadowing), always attached to the same vertex, and every sum
    /// index must be used by its body.
    pub fn check(&self) -> std::result::Result<(), Diagnostic> {
        let mut scope: BTreeMap<Symbol, Vertex> = BTreeMap::new();
        for b in self.parameters() {
            if scope.insert(b.symbol.clone(), b.vertex.clone()).is_some() {
                return Err(Diagnostic {
                    path: "root".into(),
                    message: format!("parameter {} declared twice", b.symbol),
                });
            }
        }
        check_node(&self.expr, "root".into(), &mut scope)
    }

    pub(crate) fn ensure_well_formed(&self) -> Result<()> {
        self.check()
            .map_err(|d| Error::MalformedEstimand(d.to_string()))
    }

    /// Estimand with binders renamed for display (see
    /// [`Expr::prettify_binders`]).
    pub fn prettified(&self) -> Estimand {
        let scope = self.parameters().map(|b| b.symbol.clone()).collect();
        Estimand {
            outcomes: self.outcomes.clone(),
            constants: self.constants.clone(),
            expr: self.expr.prettify_binders(&scope),
        }
    }
}

fn check_node(
    e: &Expr,
    path: String,
    scope: &mut BTreeMap<Symbol, Vertex>,
) -> std::result::Result<(), Diagnostic> {
    let fail = |message: String| {
        Err(Diagnostic {
            path: path.clone(),
            message,
        })
    };
    match e {
        Expr::Factor(f) => {
            if f.targets.is_empty() {
                return fail("factor has no target variables".into());
            }
            let mut seen = BTreeSet::new();
            for a in f.targets.iter().chain(&f.given) {
                if !seen.insert(&a.vertex) {
                    return fail(format!("vertex {} appears twice in a factor", a.vertex));
                }
                if let Value::Var(s) = &a.value {
                    match scope.get(s) {
                        None => return fail(format!("unbound symbol {s}")),
                        Some(v) if v != &a.vertex => {
                            return fail(format!(
                                "symbol {s} ranges over {v} but is used for {}",
                                a.vertex
                            ))
                        }
                        Some(_) => {}
                    }
                }
            }
            Ok(())
        }
        Expr::Product(ts) => {
            for (i, t) in ts.iter().enumerate() {
                check_node(t, format!("{path}/product[{i}]"), scope)?;
            }
            Ok(())
        }
        Expr::Quotient(n, d) => {
            check_node(n, format!("{path}/numerator"), scope)?;
            check_node(d, format!("{path}/denominator"), scope)
        }
        Expr::Sum { over, body } | Expr::Marginal { over, body } => {
            let kind = if matches!(e, Expr::Sum { .. }) {
                "sum"
            } else {
                "marginal"
            };
            if over.is_empty() {
                return fail(format!("{kind} without indices"));
            }
            for b in over {
                if scope.contains_key(&b.symbol) {
                    return fail(format!("index {} shadows a symbol in scope", b.symbol));
                }
                if !body.mentions(&b.symbol) {
                    return fail(format!("dangling index {}", b.symbol));
                }
            }
            let mut added = Vec::new();
            for b in over {
                if scope.insert(b.symbol.clone(), b.vertex.clone()).is_some() {
                    for s in &added {
                        scope.remove(s);
                    }
                    return fail(format!("index {} listed twice", b.symbol));
                }
                added.push(b.symbol.clone());
            }
            let result = check_node(body, format!("{path}/{kind}"), scope);
            for s in &added {
                scope.remove(s);
            }
            result
        }
    }
}
