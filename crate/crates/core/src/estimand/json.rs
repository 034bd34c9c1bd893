use serde::{Deserialize, Serialize};

use super::{Arg, Bound, Estimand, Expr, Factor, Value};
use crate::error::{Error, Result};
use crate::graph::Vertex;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArgJson {
    vertex: Vertex,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    var: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    level: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundJson {
    symbol: String,
    vertex: Vertex,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorJson {
    targets: Vec<ArgJson>,
    #[serde(default)]
    given: Vec<ArgJson>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductJson {
    terms: Vec<Node>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuotientJson {
    numerator: Box<Node>,
    denominator: Box<Node>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SumJson {
    over: Vec<BoundJson>,
    body: Box<Node>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Node {
    Factor(FactorJson),
    Product(ProductJson),
    Quotient(QuotientJson),
    Sum(SumJson),
    Marginal(SumJson),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimandJson {
    schema_version: u32,
    outcomes: Vec<BoundJson>,
    constants: Vec<BoundJson>,
    expr: Node,
}

fn arg_out(a: &Arg) -> ArgJson {
    let (var, level) = match &a.value {
        Value::Var(s) => (Some(s.clone()), None),
        Value::Level(l) => (None, Some(*l)),
    };
    ArgJson {
        vertex: a.vertex.clone(),
        var,
        level,
    }
}

fn arg_in(a: ArgJson) -> Result<Arg> {
    match (a.var, a.level) {
        (Some(s), None) => Ok(Arg::var(a.vertex, s)),
        (None, Some(l)) => Ok(Arg::level(a.vertex, l)),
        _ => Err(Error::Parse(format!(
            "argument for {} needs exactly one of \"var\" and \"level\"",
            a.vertex
        ))),
    }
}

fn bounds_out(bs: &[Bound]) -> Vec<BoundJson> {
    bs.iter()
        .map(|b| BoundJson {
            symbol: b.symbol.clone(),
            vertex: b.vertex.clone(),
        })
        .collect()
}

fn bounds_in(bs: Vec<BoundJson>) -> Vec<Bound> {
    bs.into_iter()
        .map(|b| Bound::new(b.symbol, b.vertex))
        .collect()
}

fn node_out(e: &Expr) -> Node {
    match e {
        Expr::Factor(f) => Node::Factor(FactorJson {
            targets: f.targets.iter().map(arg_out).collect(),
            given: f.given.iter().map(arg_out).collect(),
        }),
        Expr::Product(ts) => Node::Product(ProductJson {
            terms: ts.iter().map(node_out).collect(),
        }),
        Expr::Quotient(n, d) => Node::Quotient(QuotientJson {
            numerator: Box::new(node_out(n)),
            denominator: Box::new(node_out(d)),
        }),
        Expr::Sum { over, body } => Node::Sum(SumJson {
            over: bounds_out(over),
            body: Box::new(node_out(body)),
        }),
        Expr::Marginal { over, body } => Node::Marginal(SumJson {
            over: bounds_out(over),
            body: Box::new(node_out(body)),
        }),
    }
}

fn node_in(n: Node) -> Result<Expr> {
    Ok(match n {
        Node::Factor(f) => Expr::Factor(Factor {
            targets: f.targets.into_iter().map(arg_in).collect::<Result<_>>()?,
            given: f.given.into_iter().map(arg_in).collect::<Result<_>>()?,
        }),
        Node::Product(p) => Expr::Product(p.terms.into_iter().map(node_in).collect::<Result<_>>()?),
        Node::Quotient(q) => Expr::quotient(node_in(*q.numerator)?, node_in(*q.denominator)?),
        Node::Sum(s) => Expr::Sum {
            over: bounds_in(s.over),
            body: Box::new(node_in(*s.body)?),
        },
        Node::Marginal(s) => Expr::Marginal {
            over: bounds_in(s.over),
            body: Box::new(node_in(*s.body)?),
        },
    })
}

impl Expr {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(node_out(self)).expect("serializable")
    }
}

impl Estimand {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(EstimandJson {
            schema_version: SCHEMA_VERSION,
            outcomes: bounds_out(&self.outcomes),
            constants: bounds_out(&self.constants),
            expr: node_out(&self.expr),
        })
        .expect("serializable")
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("serializable");
        s.push('\n');
        s
    }

    /// Parses and validates. Syntax errors carry serde's line and column.
    pub fn from_json(text: &str) -> Result<Estimand> {
        let raw: EstimandJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {}",
                raw.schema_version
            )));
        }
        let e = Estimand::new(
            bounds_in(raw.outcomes),
            bounds_in(raw.constants),
            node_in(raw.expr)?,
        );
        e.ensure_well_formed()?;
        Ok(e)
    }
}
