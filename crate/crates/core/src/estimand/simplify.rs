//! Exact rewrites on estimands. Each rule is an identity that holds for every
//! strictly positive joint distribution:
//!
//! * cancellation of syntactically identical factors across a quotient;
//! * the chain rule `p(S | C) / p(T | U) = p(S \ T \ U' | T, U) p(U' | C)`
//!   whenever `T ⊆ S`, `C ⊆ U` and `U' = U \ C ⊆ S \ T`;
//! * summing a variable out of the only factor that mentions it, where it is a
//!   target: `sum_x p(x, S | C) f = p(S | C) f`;
//! * hoisting factors that do not mention any index out of a sum.

use super::{Arg, Bound, Expr, Factor, Value};

/// Applies the rewrite rules bottom-up until nothing changes.
pub fn simplify(e: &Expr) -> Expr {
    let mut cur = e.clone();
    // Every rule shrinks the tree or moves a factor outward, so this settles
    // quickly; the bound only guards against a rule interaction bug.
    for _ in 0..256 {
        let next = pass(&cur);
        if next == cur {
            return next;
        }
        cur = next;
    }
    cur
}

fn pass(e: &Expr) -> Expr {
    match e {
        Expr::Factor(_) => e.clone(),
        Expr::Product(ts) => ratio(ts.iter().map(pass).collect(), Vec::new()),
        Expr::Quotient(n, d) => ratio(vec![pass(n)], vec![pass(d)]),
        Expr::Sum { over, body } | Expr::Marginal { over, body } => {
            sum_rules(over.clone(), pass(body))
        }
    }
}

fn split(e: Expr, numerator: bool, nums: &mut Vec<Expr>, dens: &mut Vec<Expr>) {
    match e {
        Expr::Product(ts) => {
            for t in ts {
                split(t, numerator, nums, dens);
            }
        }
        Expr::Quotient(n, d) => {
            split(*n, numerator, nums, dens);
            split(*d, !numerator, nums, dens);
        }
        other => {
            if numerator {
                nums.push(other)
            } else {
                dens.push(other)
            }
        }
    }
}

/// Flattens `prod(nums) / prod(dens)` into atoms, cancels and applies the
/// chain rule, and rebuilds a single product or quotient.
fn ratio(num_terms: Vec<Expr>, den_terms: Vec<Expr>) -> Expr {
    let (mut nums, mut dens) = (Vec::new(), Vec::new());
    for t in num_terms {
        split(t, true, &mut nums, &mut dens);
    }
    for t in den_terms {
        split(t, false, &mut nums, &mut dens);
    }

    let mut i = 0;
    'dens: while i < dens.len() {
        if let Some(j) = nums.iter().position(|n| *n == dens[i]) {
            nums.remove(j);
            dens.remove(i);
            continue;
        }
        if let Expr::Factor(d) = &dens[i] {
            for j in 0..nums.len() {
                if let Expr::Factor(n) = &nums[j] {
                    if let Some(replacement) = chain_divide(n, d) {
                        nums.splice(j..=j, replacement);
                        dens.remove(i);
                        continue 'dens;
                    }
                }
            }
        }
        i += 1;
    }

    let num = Expr::product(nums);
    if dens.is_empty() {
        num
    } else {
        Expr::quotient(num, Expr::product(dens))
    }
}

fn sorted(mut args: Vec<Arg>) -> Vec<Arg> {
    args.sort_by(|a, b| a.vertex.cmp(&b.vertex));
    args
}

fn chain_divide(n: &Factor, d: &Factor) -> Option<Vec<Expr>> {
    let contains = |set: &[Arg], a: &Arg| set.contains(a);
    if !d.targets.iter().all(|a| contains(&n.targets, a)) {
        return None;
    }
    if !n.given.iter().all(|a| contains(&d.given, a)) {
        return None;
    }
    let extra: Vec<Arg> = d
        .given
        .iter()
        .filter(|a| !contains(&n.given, a))
        .cloned()
        .collect();
    if !extra
        .iter()
        .all(|a| contains(&n.targets, a) && !contains(&d.targets, a))
    {
        return None;
    }
    let rest: Vec<Arg> = n
        .targets
        .iter()
        .filter(|a| !contains(&d.targets, a) && !contains(&extra, a))
        .cloned()
        .collect();

    let mut out = Vec::new();
    if !rest.is_empty() {
        let mut given = d.targets.clone();
        given.extend(d.given.iter().cloned());
        out.push(Expr::factor(sorted(rest), sorted(given)));
    }
    if !extra.is_empty() {
        out.push(Expr::factor(sorted(extra), n.given.clone()));
    }
    Some(out)
}

fn sum_rules(mut over: Vec<Bound>, mut body: Expr) -> Expr {
    loop {
        match body {
            Expr::Sum {
                over: inner,
                body: b,
            }
            | Expr::Marginal {
                over: inner,
                body: b,
            } => {
                over.extend(inner);
                body = *b;
            }
            other => {
                body = other;
                break;
            }
        }
    }
    if over.is_empty() {
        return body;
    }

    if let Expr::Quotient(n, d) = &body {
        if over.iter().all(|b| !d.mentions(&b.symbol)) {
            return Expr::quotient(sum_rules(over, (**n).clone()), (**d).clone());
        }
        return Expr::Sum {
            over,
            body: Box::new(body),
        };
    }

    let mut terms = match body {
        Expr::Product(ts) => ts,
        other => vec![other],
    };

    let mut changed = true;
    while changed {
        changed = false;
        for k in 0..over.len() {
            let sym = over[k].symbol.clone();
            let users: Vec<usize> = (0..terms.len())
                .filter(|&i| terms[i].mentions(&sym))
                .collect();
            if users.len() != 1 {
                continue;
            }
            let i = users[0];
            let Expr::Factor(f) = &terms[i] else { continue };
            if f.given.iter().any(|a| factor_mentions_arg(a, &sym)) {
                continue;
            }
            let targets: Vec<Arg> = f
                .targets
                .iter()
                .filter(|a| !factor_mentions_arg(a, &sym))
                .cloned()
                .collect();
            if targets.is_empty() {
                terms.remove(i);
            } else {
                terms[i] = Expr::factor(targets, f.given.clone());
            }
            over.remove(k);
            changed = true;
            break;
        }
    }

    if over.is_empty() {
        return Expr::product(terms);
    }
    let (outside, inside): (Vec<Expr>, Vec<Expr>) = terms
        .into_iter()
        .partition(|t| over.iter().all(|b| !t.mentions(&b.symbol)));
    if inside.is_empty() {
        // Dangling indices; leave as is for the well-formedness check to flag.
        return Expr::Sum {
            over,
            body: Box::new(Expr::product(outside)),
        };
    }
    let mut result = outside;
    result.push(Expr::Sum {
        over,
        body: Box::new(Expr::product(inside)),
    });
    Expr::product(result)
}

fn factor_mentions_arg(a: &Arg, symbol: &str) -> bool {
    matches!(&a.value, Value::Var(s) if s == symbol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vertex;

    fn v(name: &str) -> Vertex {
        Vertex::new(name).unwrap()
    }

    fn var(name: &str, sym: &str) -> Arg {
        Arg::var(v(name), sym)
    }

    #[test]
    fn conditional_formation() {
        // p(A, C) / p(C) = p(A | C)
        let e = Expr::quotient(
            Expr::factor(vec![var("A", "A"), var("C", "C")], vec![]),
            Expr::factor(vec![var("C", "C")], vec![]),
        );
        assert_eq!(
            simplify(&e),
            Expr::factor(vec![var("A", "A")], vec![var("C", "C")])
        );
    }

    #[test]
    fn chain_rule_split() {
        // p(A, M, Y | C) / p(M | A, C) = p(Y | A, C, M) p(A | C)
        let e = Expr::quotient(
            Expr::factor(
                vec![var("A", "A"), var("M", "M"), var("Y", "Y")],
                vec![var("C", "C")],
            ),
            Expr::factor(vec![var("M", "M")], vec![var("A", "A"), var("C", "C")]),
        );
        assert_eq!(
            simplify(&e),
            Expr::product(vec![
                Expr::factor(
                    vec![var("Y", "Y")],
                    vec![var("A", "A"), var("C", "C"), var("M", "M")]
                ),
                Expr::factor(vec![var("A", "A")], vec![var("C", "C")]),
            ])
        );
    }

    #[test]
    fn marginalization_and_cancellation() {
        // sum_{y} p(y | M, a) p(a, C)  summed over a as well -> p(C)
        let e = Expr::sum(
            vec![Bound::new("y", v("Y")), Bound::new("a", v("A"))],
            Expr::product(vec![
                Expr::factor(vec![var("Y", "y")], vec![var("M", "M"), var("A", "a")]),
                Expr::factor(vec![var("A", "a"), var("C", "C")], vec![]),
            ]),
        );
        assert_eq!(simplify(&e), Expr::factor(vec![var("C", "C")], vec![]));

        let q = Expr::factor(vec![var("Y", "Y")], vec![]);
        let s = Expr::sum(
            vec![Bound::new("a", v("A"))],
            Expr::factor(vec![var("A", "a"), var("Y", "Y")], vec![]),
        );
        // q / (q / s) = s
        let e = Expr::quotient(q.clone(), Expr::quotient(q, s.clone()));
        assert_eq!(simplify(&e), simplify(&s));
    }

    #[test]
    fn blocked_when_index_is_conditioned_on() {
        let e = Expr::sum(
            vec![Bound::new("a", v("A"))],
            Expr::factor(vec![var("Y", "Y")], vec![var("A", "a")]),
        );
        assert_eq!(simplify(&e), e);
    }
}
