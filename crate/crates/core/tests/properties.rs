mod common;

use std::collections::BTreeMap;

use causal_id::estimand::{Arg, Bound, Evaluator, Factor};
use causal_id::graph::ColliderReading;
use causal_id::identify::{
    failure_characterizations, g_formula, identify_district, identify_with, is_hedge, Conditioning,
    IdentifyOptions, KernelSearch,
};
use causal_id::oracle::{random_scm, uniform_cards, verify};
use causal_id::random::{random_admg, random_hidden_dag, random_query};
use causal_id::{
    fixtures, identify, BigRational, Estimand, ExactScm, Expr, IdentificationResult, MixedGraph,
    Query, Scm32, Scm64, VertexSet,
};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn admg(seed: u64, n: usize) -> (MixedGraph, ChaCha8Rng) {
    let mut r = rng(seed);
    let g = random_admg(&mut r, n, 0.35, 0.3);
    (g, r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fixing_order_is_irrelevant(seed in any::<u64>(), n in 2usize..=6) {
        let (g, mut r) = admg(seed, n);
        let j = random_subset(&mut r, g.random(), 4);
        prop_assert_eq!(fixing_calculus_holds(&g, &j), Ok(()));
    }

    #[test]
    fn fixing_shrinks_the_random_set(seed in any::<u64>(), n in 1usize..=6) {
        let (g, _) = admg(seed, n);
        for v in g.random().clone() {
            if g.is_fixable(&v).unwrap() {
                let h = g.fix(&v).unwrap();
                prop_assert!(h.is_fixed(&v));
                prop_assert_eq!(h.random().len() + 1, g.random().len());
                prop_assert!(h.parents_of(&v).is_empty());
                prop_assert!(h.spouses_of(&v).is_empty());
                prop_assert!(h.edge_count() <= g.edge_count());
            }
        }
    }

    #[test]
    fn reachable_closure_is_a_closure(seed in any::<u64>(), n in 1usize..=6) {
        let (g, mut r) = admg(seed, n);
        let s = random_subset(&mut r, g.random(), n);
        let t: VertexSet = s.union(&random_subset(&mut r, g.random(), n)).cloned().collect();
        let cs = g.reachable_closure(&s).unwrap();
        prop_assert!(s.is_subset(&cs));
        prop_assert_eq!(g.reachable_closure(&cs).unwrap(), cs.clone());
        prop_assert!(cs.is_subset(&g.reachable_closure(&t).unwrap()));
    }

    #[test]
    fn districts_partition_the_random_vertices(seed in any::<u64>(), n in 1usize..=7) {
        let (g, _) = admg(seed, n);
        let ds = g.districts();
        let mut seen = VertexSet::new();
        for d in &ds {
            prop_assert!(!d.is_empty());
            prop_assert!(g.is_bidirected_connected(d));
            for v in d {
                prop_assert!(seen.insert(v.clone()), "{} in two districts", v);
                prop_assert_eq!(&g.district_of(v).unwrap(), d);
            }
        }
        prop_assert_eq!(&seen, g.random());
    }

    #[test]
    fn blanket_and_nondescendant_conditioning_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dag = random_hidden_dag(&mut r, 5, 2, 0.4);
        let g = dag.latent_project().unwrap();
        let scm: Scm64 = random_scm(&dag, &uniform_cards(&dag, 2), seed).unwrap();
        let joint = scm.observed_joint();
        let blanket = IdentifyOptions {
            simplify: false,
            conditioning: Conditioning::ColliderBlanket(ColliderReading::NonDescendant),
        };
        for d in g.districts() {
            let a = identify_district(&g, &d, IdentifyOptions::raw()).unwrap();
            let b = identify_district(&g, &d, blanket).unwrap();
            if let (KernelSearch::Identified(a), KernelSearch::Identified(b)) = (a, b) {
                prop_assert!(max_gap(&joint, &a.estimand, &b.estimand) < 1e-9);
            }
        }
    }

    #[test]
    fn identified_estimands_normalize(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dag = random_hidden_dag(&mut r, 5, 2, 0.4);
        let g = dag.latent_project().unwrap();
        let q = random_query(&mut r, &g.observed());
        let scm: Scm64 = random_scm(&dag, &uniform_cards(&dag, 2), seed).unwrap();
        let joint = scm.observed_joint();
        if let IdentificationResult::Identified { estimand, .. } = identify(&g, &q).unwrap() {
            let table = Evaluator::new(&joint).table(&estimand).unwrap();
            let mut totals: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
            for b in bindings(&joint, &estimand) {
                let key: Vec<usize> = estimand.constants.iter().map(|c| b[&c.symbol]).collect();
                *totals.entry(key).or_default() += table.get(&b).unwrap();
            }
            for total in totals.values() {
                prop_assert!((total - 1.0).abs() < 1e-9, "total {}", total);
            }
        }
    }

    #[test]
    fn raw_and_simplified_estimands_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dag = random_hidden_dag(&mut r, 5, 2, 0.4);
        let g = dag.latent_project().unwrap();
        let q = random_query(&mut r, &g.observed());
        let raw = identify_with(&g, &q, IdentifyOptions::raw()).unwrap();
        let simple = identify(&g, &q).unwrap();
        prop_assert_eq!(raw.is_identified(), simple.is_identified());
        if let (Some(a), Some(b)) = (raw.estimand(), simple.estimand()) {
            prop_assert!(b.expr.size() <= a.expr.size());
            let scm: Scm64 = random_scm(&dag, &uniform_cards(&dag, 2), seed).unwrap();
            prop_assert!(max_gap(&scm.observed_joint(), a, b) < 1e-9);
        }
    }

    #[test]
    fn failures_carry_valid_hedges(seed in any::<u64>(), n in 2usize..=6) {
        let (g, mut r) = admg(seed, n);
        let q = random_query(&mut r, &g.observed());
        let result = identify(&g, &q).unwrap();
        let f = failure_characterizations(&g, &q).unwrap();
        prop_assert!(f.agree());
        prop_assert_eq!(f.hedge_exists, !result.is_identified());
        if let Some(w) = result.witness() {
            prop_assert!(is_hedge(&g, &q, w));
            prop_assert!(w.inner.vertices.is_subset(&w.outer.vertices));
        }
    }

    #[test]
    fn dags_reduce_to_the_g_formula(seed in any::<u64>(), n in 2usize..=6) {
        let mut r = rng(seed);
        let g = random_admg(&mut r, n, 0.4, 0.0);
        let q = random_query(&mut r, &g.observed());
        let result = identify(&g, &q).unwrap();
        let e = result.estimand().expect("DAG queries are identified");
        let scm: Scm64 = random_scm(&g, &uniform_cards(&g, 2), seed).unwrap();
        prop_assert!(max_gap(&scm.observed_joint(), e, &g_formula(&g, &q).unwrap()) < 1e-9);
    }

    #[test]
    fn projection_invariance(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dag = random_hidden_dag(&mut r, 5, 2, 0.4);
        let split = split_hidden(&dag);
        let g = dag.latent_project().unwrap();
        prop_assert_eq!(&split.latent_project().unwrap(), &g);
        let q = random_query(&mut r, &g.observed());
        let result = identify(&g, &q).unwrap();
        if result.is_identified() {
            for model in [&dag, &split] {
                let scm: Scm64 = random_scm(model, &uniform_cards(model, 2), seed).unwrap();
                let report = verify(&scm, &g, &q, &result, 1e-9).unwrap();
                prop_assert!(report.passed, "{:?}", report);
            }
        }
    }

    #[test]
    fn estimand_json_round_trips(e in estimand_strategy()) {
        let text = e.to_json();
        prop_assert_eq!(Estimand::from_json(&text).unwrap(), e);
    }
}

/// Replaces every hidden vertex by one hidden vertex per pair of its
/// children, which leaves the latent projection unchanged.
fn split_hidden(dag: &MixedGraph) -> MixedGraph {
    let mut b = MixedGraph::builder().vertices(dag.observed().iter().map(|v| v.to_string()));
    for (t, h) in dag.directed_edges() {
        if !dag.hidden().contains(t) {
            b = b.directed(t.to_string(), h.to_string());
        }
    }
    for h in dag.hidden() {
        let kids: Vec<_> = dag.children_of(h).iter().collect();
        for i in 0..kids.len() {
            for k in kids.iter().skip(i + 1) {
                let name = format!("{h}_{}_{}", kids[i], k);
                b = b
                    .vertex(name.clone())
                    .hidden([name.clone()])
                    .directed(name.clone(), kids[i].to_string())
                    .directed(name, k.to_string());
            }
        }
    }
    b.build().unwrap()
}

fn arg(symbol: &str, vertex: &str, level: Option<usize>) -> Arg {
    match level {
        Some(l) => Arg::level(v(vertex), l),
        None => Arg::var(v(vertex), symbol),
    }
}

/// Closed trees over parameters `y` (Y) and `a` (A); the body may mention the
/// binders `s` and `t` of the enclosing sum.
fn estimand_strategy() -> impl Strategy<Value = Estimand> {
    let pool = vec![("y", "Y"), ("a", "A"), ("s", "S"), ("t", "T")];
    let factor = (
        Just(pool).prop_shuffle(),
        1usize..=2,
        0usize..=2,
        prop::collection::vec(prop::option::of(0usize..3), 4),
    )
        .prop_map(|(slots, n_targets, n_given, levels)| {
            let args: Vec<Arg> = slots
                .iter()
                .zip(levels)
                .map(|(&(s, vx), l)| arg(s, vx, l))
                .collect();
            Expr::Factor(Factor {
                targets: args[..n_targets].to_vec(),
                given: args[n_targets..n_targets + n_given].to_vec(),
            })
        });
    let tree = factor.prop_recursive(4, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(Expr::Product),
            (inner.clone(), inner).prop_map(|(n, d)| Expr::Quotient(Box::new(n), Box::new(d))),
        ]
    });
    (tree, any::<bool>()).prop_map(|(body, marginal)| {
        let over = vec![Bound::new("s", v("S")), Bound::new("t", v("T"))];
        let anchor = Expr::factor(
            vec![Arg::var(v("S"), "s"), Arg::var(v("T"), "t")],
            vec![Arg::var(v("Y"), "y"), Arg::var(v("A"), "a")],
        );
        let body = Box::new(Expr::Product(vec![anchor, body]));
        let expr = if marginal {
            Expr::Marginal { over, body }
        } else {
            Expr::Sum { over, body }
        };
        Estimand::new(
            vec![Bound::new("y", v("Y"))],
            vec![Bound::new("a", v("A"))],
            expr,
        )
    })
}

#[test]
fn exact_arithmetic_has_zero_deviation() {
    let dag = fixtures::front_door_dag();
    let g = fixtures::front_door();
    let q = Query::parse("Y", "A").unwrap();
    let result = identify(&g, &q).unwrap();
    for seed in 0..5 {
        let scm: ExactScm = random_scm(&dag, &uniform_cards(&dag, 2), seed).unwrap();
        let report = verify(&scm, &g, &q, &result, 0.0).unwrap();
        assert_eq!(report.max_abs_deviation, 0.0);
        assert!(report.passed);
        assert_eq!(
            scm.observed_joint().total(),
            BigRational::from_integer(1.into())
        );
    }
    let dag = fixtures::hedge_counterexample_dag();
    let g = fixtures::hedge_counterexample_admg();
    let q = Query::parse("Y", "A1,A2").unwrap();
    let result = identify(&g, &q).unwrap();
    let scm: ExactScm = random_scm(&dag, &uniform_cards(&dag, 3), 11).unwrap();
    assert_eq!(
        verify(&scm, &g, &q, &result, 0.0)
            .unwrap()
            .max_abs_deviation,
        0.0
    );
}

#[test]
fn single_precision_is_close() {
    let dag = fixtures::front_door_dag();
    let g = fixtures::front_door();
    let q = Query::parse("Y", "A").unwrap();
    let result = identify(&g, &q).unwrap();
    for seed in 0..10 {
        let scm: Scm32 = random_scm(&dag, &uniform_cards(&dag, 2), seed).unwrap();
        assert!(verify(&scm, &g, &q, &result, 1e-4).unwrap().passed);
    }
}

/// Drops `A` from the conditioning set of the first factor for `M`.
fn drop_treatment_from_mediator(e: &Expr) -> Expr {
    match e {
        Expr::Factor(f) if f.targets.iter().any(|a| a.vertex.as_str() == "M") => {
            Expr::Factor(Factor {
                targets: f.targets.clone(),
                given: f
                    .given
                    .iter()
                    .filter(|a| a.vertex.as_str() != "A")
                    .cloned()
                    .collect(),
            })
        }
        Expr::Factor(_) => e.clone(),
        Expr::Product(ts) => Expr::Product(ts.iter().map(drop_treatment_from_mediator).collect()),
        Expr::Quotient(n, d) => Expr::Quotient(
            Box::new(drop_treatment_from_mediator(n)),
            Box::new(drop_treatment_from_mediator(d)),
        ),
        Expr::Sum { over, body } => Expr::Sum {
            over: over.clone(),
            body: Box::new(drop_treatment_from_mediator(body)),
        },
        Expr::Marginal { over, body } => Expr::Marginal {
            over: over.clone(),
            body: Box::new(drop_treatment_from_mediator(body)),
        },
    }
}

#[test]
fn corrupted_estimands_fail_verification() {
    let dag = fixtures::front_door_dag();
    let g = fixtures::front_door();
    let q = Query::parse("Y", "A").unwrap();
    let IdentificationResult::Identified {
        estimand,
        ystar,
        districts,
    } = identify(&g, &q).unwrap()
    else {
        panic!("front door is identified")
    };
    let broken = Estimand {
        expr: drop_treatment_from_mediator(&estimand.expr),
        ..estimand.clone()
    };
    assert_ne!(broken, estimand);
    let corrupted = IdentificationResult::Identified {
        estimand: broken,
        ystar,
        districts,
    };
    let failures = (0..20)
        .filter(|&seed| {
            let scm: Scm64 = random_scm(&dag, &uniform_cards(&dag, 2), seed).unwrap();
            !verify(&scm, &g, &q, &corrupted, 1e-9).unwrap().passed
        })
        .count();
    assert_eq!(failures, 20);
}

#[test]
fn counterexample_regression() {
    let g = fixtures::hedge_counterexample_admg();
    let full = Query::parse("Y", "A1,A2").unwrap();
    let sub = Query::parse("Y", "A2").unwrap();
    assert!(identify(&g, &full).unwrap().is_identified());
    assert!(!failure_characterizations(&g, &full).unwrap().hedge_exists);
    let f = failure_characterizations(&g, &sub).unwrap();
    assert!(f.hedge_exists && f.some_district_not_intrinsic && f.some_district_proper_closure);
    let w = identify(&g, &sub).unwrap();
    let w = w.witness().unwrap();
    assert_eq!(w.inner.vertices, set(&["W", "Y"]));
    assert_eq!(w.outer.vertices, set(&["A2", "W", "Y"]));
    assert!(!is_hedge(&g, &full, w));
}
