//! Causal effect identification over acyclic directed mixed graphs.
//!
//! Graphs ([`MixedGraph`]) cover hidden-variable DAGs, ADMGs and conditional
//! ADMGs. [`identify`](identify::identify) returns either a symbolic
//! [`Estimand`] over the observed joint or a hedge certificate, and the
//! [`oracle`] module checks estimands against exact discrete SCMs.

pub mod error;
pub mod estimand;
pub mod fixing;
pub mod fixtures;
pub mod graph;
pub mod identify;
pub mod oracle;
pub mod random;
pub mod scalar;
pub mod table;

pub use error::{Error, Result};
pub use estimand::{Estimand, Expr};
pub use fixing::{FixingSequence, SequenceSearch};
pub use graph::{MixedGraph, Vertex, VertexSet};
pub use identify::{identify, IdentificationResult, Query};
pub use oracle::DiscreteScm;
pub use scalar::Scalar;
pub use table::ProbTable;

pub use num_rational::BigRational;

pub type ProbTable64 = ProbTable<f64>;
pub type ProbTable32 = ProbTable<f32>;
pub type ExactProbTable = ProbTable<BigRational>;
pub type Scm64 = DiscreteScm<f64>;
pub type Scm32 = DiscreteScm<f32>;
pub type ExactScm = DiscreteScm<BigRational>;
