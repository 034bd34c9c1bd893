use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{Vertex, VertexSet};
use crate::scalar::Scalar;

/// Dense table over a list of discrete variables, row-major with the last
/// variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable<T> {
    variables: Vec<Vertex>,
    cards: Vec<usize>,
    values: Vec<T>,
}

/// Every assignment of `cards` in row-major order.
pub fn assignments(cards: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = cards.iter().product();
    let mut current = vec![0usize; cards.len()];
    let mut first = true;
    (0..total).map(move |_| {
        if !first {
            for i in (0..cards.len()).rev() {
                current[i] += 1;
                if current[i] < cards[i] {
                    break;
                }
                current[i] = 0;
            }
        }
        first = false;
        current.clone()
    })
}

pub(crate) fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

impl<T: Scalar> ProbTable<T> {
    pub fn new(variables: Vec<Vertex>, cards: Vec<usize>, values: Vec<T>) -> Result<Self> {
        if variables.len() != cards.len() {
            return Err(Error::InvalidInput(
                "one cardinality per variable required".into(),
            ));
        }
        let distinct: VertexSet = variables.iter().cloned().collect();
        if distinct.len() != variables.len() {
            return Err(Error::InvalidInput("repeated table variable".into()));
        }
        if cards.contains(&0) {
            return Err(Error::InvalidInput("zero cardinality".into()));
        }
        let size: usize = cards.iter().product();
        if values.len() != size {
            return Err(Error::InvalidInput(format!(
                "expected {size} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| v.is_negative()) {
            return Err(Error::InvalidInput("negative probability".into()));
        }
        Ok(ProbTable {
            variables,
            cards,
            values,
        })
    }

    pub fn variables(&self) -> &[Vertex] {
        &self.variables
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn cardinality(&self, v: &Vertex) -> Option<usize> {
        self.position(v).map(|i| self.cards[i])
    }

    fn position(&self, v: &Vertex) -> Option<usize> {
        self.variables.iter().position(|w| w == v)
    }

    pub fn index_of(&self, assignment: &[usize]) -> usize {
        assignment
            .iter()
            .zip(strides(&self.cards))
            .map(|(a, s)| a * s)
            .sum()
    }

    pub fn get(&self, assignment: &[usize]) -> &T {
        &self.values[self.index_of(assignment)]
    }

    /// Looks up the cell for a named assignment covering every variable.
    pub fn get_named(&self, assignment: &BTreeMap<Vertex, usize>) -> Result<T> {
        let mut idx = Vec::with_capacity(self.variables.len());
        for (v, &card) in self.variables.iter().zip(&self.cards) {
            let value = *assignment
                .get(v)
                .ok_or_else(|| Error::InvalidInput(format!("no value for {v}")))?;
            if value >= card {
                return Err(Error::InvalidInput(format!(
                    "value {value} out of range for {v}"
                )));
            }
            idx.push(value);
        }
        Ok(self.get(&idx).clone())
    }

    pub fn total(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc + v.clone())
    }

    /// Sums out every variable not in `keep`. Kept variables retain their
    /// order.
    pub fn marginal(&self, keep: &VertexSet) -> Result<ProbTable<T>> {
        if let Some(v) = keep.iter().find(|v| self.position(v).is_none()) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        let kept: Vec<usize> = (0..self.variables.len())
            .filter(|&i| keep.contains(&self.variables[i]))
            .collect();
        let cards: Vec<usize> = kept.iter().map(|&i| self.cards[i]).collect();
        let out_strides = strides(&cards);
        let mut values = vec![T::zero(); cards.iter().product()];
        for (cell, assignment) in assignments(&self.cards).enumerate() {
            let target: usize = kept
                .iter()
                .zip(&out_strides)
                .map(|(&i, s)| assignment[i] * s)
                .sum();
            values[target] = values[target].clone() + self.values[cell].clone();
        }
        Ok(ProbTable {
            variables: kept.iter().map(|&i| self.variables[i].clone()).collect(),
            cards,
            values,
        })
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> ProbTable<U> {
        ProbTable {
            variables: self.variables.clone(),
            cards: self.cards.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Largest absolute cellwise difference, after aligning variable order.
    pub fn max_abs_difference(&self, other: &ProbTable<T>) -> Result<T> {
        let order: Vec<usize> = self
            .variables
            .iter()
            .map(|v| {
                other
                    .position(v)
                    .ok_or_else(|| Error::InvalidInput(format!("{v} missing from table")))
            })
            .collect::<Result<_>>()?;
        if other.variables.len() != self.variables.len() {
            return Err(Error::InvalidInput(
                "tables have different variables".into(),
            ));
        }
        let mut worst = T::zero();
        let mut theirs = vec![0usize; order.len()];
        for (cell, a) in assignments(&self.cards).enumerate() {
            for (i, &j) in order.iter().enumerate() {
                theirs[j] = a[i];
            }
            let d = (self.values[cell].clone() - other.get(&theirs).clone()).abs();
            if d > worst {
                worst = d;
            }
        }
        Ok(worst)
    }
}
