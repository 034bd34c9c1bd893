use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use super::{Bound, Estimand, Expr, Factor, Symbol, Value};
use crate::error::{Error, Result};
use crate::graph::{Vertex, VertexSet};
use crate::scalar::Scalar;
use crate::table::{assignments, strides, ProbTable};

/// Dense table over symbols, axes sorted by symbol name.
#[derive(Debug, Clone)]
struct Tensor<T> {
    axes: Vec<Symbol>,
    cards: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    fn scalar(value: T) -> Self {
        Tensor {
            axes: Vec::new(),
            cards: Vec::new(),
            data: vec![value],
        }
    }

    fn project(&self, axes: &[Symbol], assignment: &[usize]) -> usize {
        let s = strides(&self.cards);
        let mut idx = 0;
        for (k, axis) in self.axes.iter().enumerate() {
            let pos = axes.iter().position(|a| a == axis).expect("axis present");
            idx += assignment[pos] * s[k];
        }
        idx
    }

    /// Pointwise combination over the union of both axis sets.
    fn combine(&self, other: &Tensor<T>, f: impl Fn(&T, &T) -> Result<T>) -> Result<Tensor<T>> {
        let mut merged: BTreeMap<&Symbol, usize> = BTreeMap::new();
        for (a, &c) in self
            .axes
            .iter()
            .zip(&self.cards)
            .chain(other.axes.iter().zip(&other.cards))
        {
            merged.insert(a, c);
        }
        let axes: Vec<Symbol> = merged.keys().map(|s| (*s).clone()).collect();
        let cards: Vec<usize> = merged.values().copied().collect();
        let mut data = Vec::with_capacity(cards.iter().product());
        for a in assignments(&cards) {
            let x = &self.data[self.project(&axes, &a)];
            let y = &other.data[other.project(&axes, &a)];
            data.push(f(x, y)?);
        }
        Ok(Tensor { axes, cards, data })
    }
}

/// Evaluates estimands against one joint table, caching the marginals it
/// needs. Results are exact for exact scalars; for floats the summation order
/// is fixed (row-major over sorted symbols), so repeated runs agree bit for
/// bit.
pub struct Evaluator<'a, T> {
    joint: &'a ProbTable<T>,
    marginals: RefCell<HashMap<VertexSet, ProbTable<T>>>,
}

/// Values of an estimand for every assignment of the parameters it mentions.
#[derive(Debug, Clone)]
pub struct EstimandTable<T> {
    axes: Vec<Bound>,
    cards: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> EstimandTable<T> {
    pub fn axes(&self) -> &[Bound] {
        &self.axes
    }

    /// Looks up a binding; parameters that the estimand does not mention are
    /// ignored.
    pub fn get(&self, binding: &BTreeMap<Symbol, usize>) -> Result<T> {
        let mut idx = 0;
        for ((b, &card), s) in self.axes.iter().zip(&self.cards).zip(strides(&self.cards)) {
            let value = *binding
                .get(&b.symbol)
                .ok_or_else(|| Error::Evaluation(format!("missing binding for {}", b.symbol)))?;
            if value >= card {
                return Err(Error::Evaluation(format!(
                    "value {value} out of range for {}",
                    b.symbol
                )));
            }
            idx += value * s;
        }
        Ok(self.values[idx].clone())
    }
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    pub fn new(joint: &'a ProbTable<T>) -> Self {
        Evaluator {
            joint,
            marginals: RefCell::new(HashMap::new()),
        }
    }

    /// Value of `e` at `binding`, which must give a level to every parameter
    /// the expression mentions.
    pub fn evaluate(&self, e: &Estimand, binding: &BTreeMap<Symbol, usize>) -> Result<T> {
        self.table(e)?.get(binding)
    }

    pub fn table(&self, e: &Estimand) -> Result<EstimandTable<T>> {
        e.ensure_well_formed()?;
        let t = self.eval(&e.expr)?;
        let axes = t
            .axes
            .iter()
            .map(|s| {
                e.parameters()
                    .find(|b| &b.symbol == s)
                    .cloned()
                    .ok_or_else(|| Error::Internal(format!("free symbol {s} is not a parameter")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EstimandTable {
            axes,
            cards: t.cards,
            values: t.data,
        })
    }

    fn cardinality(&self, v: &Vertex) -> Result<usize> {
        self.joint
            .cardinality(v)
            .ok_or_else(|| Error::Evaluation(format!("vertex {v} is not in the joint table")))
    }

    fn marginal(&self, keep: VertexSet) -> Result<ProbTable<T>> {
        if let Some(t) = self.marginals.borrow().get(&keep) {
            return Ok(t.clone());
        }
        let t = self
            .joint
            .marginal(&keep)
            .map_err(|e| Error::Evaluation(e.to_string()))?;
        self.marginals.borrow_mut().insert(keep, t.clone());
        Ok(t)
    }

    fn eval(&self, e: &Expr) -> Result<Tensor<T>> {
        match e {
            Expr::Factor(f) => self.eval_factor(f, e),
            Expr::Product(ts) => {
                let mut acc = Tensor::scalar(T::one());
                for t in ts {
                    acc = acc.combine(&self.eval(t)?, |x, y| Ok(x.clone() * y.clone()))?;
                }
                Ok(acc)
            }
            Expr::Quotient(n, d) => {
                let num = self.eval(n)?;
                let den = self.eval(d)?;
                num.combine(&den, |x, y| {
                    if y.is_zero() {
                        Err(Error::Evaluation(format!("zero denominator in {d}")))
                    } else {
                        Ok(x.clone() / y.clone())
                    }
                })
            }
            Expr::Sum { over, body } | Expr::Marginal { over, body } => {
                let mut t = self.eval(body)?;
                for b in over {
                    t = match t.axes.iter().position(|a| a == &b.symbol) {
                        Some(k) => sum_axis(&t, k),
                        None => {
                            let c =
                                T::from_usize(self.cardinality(&b.vertex)?).expect("small integer");
                            Tensor {
                                data: t.data.iter().map(|x| x.clone() * c.clone()).collect(),
                                ..t
                            }
                        }
                    };
                }
                Ok(t)
            }
        }
    }

    fn eval_factor(&self, f: &Factor, whole: &Expr) -> Result<Tensor<T>> {
        let all: VertexSet = f
            .targets
            .iter()
            .chain(&f.given)
            .map(|a| a.vertex.clone())
            .collect();
        let given: VertexSet = f.given.iter().map(|a| a.vertex.clone()).collect();
        let joint = self.marginal(all)?;
        let cond = self.marginal(given)?;

        let mut axes: BTreeMap<Symbol, (Vertex, usize)> = BTreeMap::new();
        for a in f.targets.iter().chain(&f.given) {
            let card = self.cardinality(&a.vertex)?;
            match &a.value {
                Value::Var(s) => {
                    axes.insert(s.clone(), (a.vertex.clone(), card));
                }
                Value::Level(l) if *l >= card => {
                    return Err(Error::Evaluation(format!(
                        "level {l} out of range for {} in {whole}",
                        a.vertex
                    )))
                }
                Value::Level(_) => {}
            }
        }
        let names: Vec<Symbol> = axes.keys().cloned().collect();
        let cards: Vec<usize> = axes.values().map(|(_, c)| *c).collect();
        let level_of = |a: &super::Arg, assignment: &[usize]| match &a.value {
            Value::Var(s) => assignment[names.iter().position(|n| n == s).expect("axis")],
            Value::Level(l) => *l,
        };
        let lookup = |table: &ProbTable<T>, assignment: &[usize]| -> T {
            let idx: Vec<usize> = table
                .variables()
                .iter()
                .map(|v| {
                    let arg = f
                        .targets
                        .iter()
                        .chain(&f.given)
                        .find(|a| &a.vertex == v)
                        .expect("factor vertex");
                    level_of(arg, assignment)
                })
                .collect();
            table.get(&idx).clone()
        };

        let mut data = Vec::with_capacity(cards.iter().product());
        for a in assignments(&cards) {
            let num = lookup(&joint, &a);
            let den = lookup(&cond, &a);
            if den.is_zero() {
                return Err(Error::Evaluation(format!(
                    "zero denominator in {whole}: conditioning event has probability zero"
                )));
            }
            data.push(num / den);
        }
        Ok(Tensor {
            axes: names,
            cards,
            data,
        })
    }
}

fn sum_axis<T: Scalar>(t: &Tensor<T>, k: usize) -> Tensor<T> {
    let mut axes = t.axes.clone();
    let mut cards = t.cards.clone();
    axes.remove(k);
    cards.remove(k);
    let out_strides = strides(&cards);
    let mut data = vec![T::zero(); cards.iter().product()];
    for (cell, a) in assignments(&t.cards).enumerate() {
        let mut idx = 0;
        let mut j = 0;
        for (i, &x) in a.iter().enumerate() {
            if i != k {
                idx += x * out_strides[j];
                j += 1;
            }
        }
        data[idx] = data[idx].clone() + t.data[cell].clone();
    }
    Tensor { axes, cards, data }
}

impl Estimand {
    /// Convenience wrapper around [`Evaluator::evaluate`].
    pub fn evaluate<T: Scalar>(
        &self,
        joint: &ProbTable<T>,
        binding: &BTreeMap<Symbol, usize>,
    ) -> Result<T> {
        Evaluator::new(joint).evaluate(self, binding)
    }
}
