use std::fmt;

use super::{Arg, Bound, Estimand, Expr, Factor, Value};

fn text_arg(a: &Arg) -> String {
    match &a.value {
        Value::Var(s) => s.clone(),
        Value::Level(l) => format!("{}={l}", a.vertex),
    }
}

fn text_factor(f: &Factor) -> String {
    let targets: Vec<String> = f.targets.iter().map(text_arg).collect();
    if f.given.is_empty() {
        format!("p({})", targets.join(","))
    } else {
        let given: Vec<String> = f.given.iter().map(text_arg).collect();
        format!("p({}|{})", targets.join(","), given.join(","))
    }
}

fn text_indices(over: &[Bound]) -> String {
    over.iter()
        .map(|b| b.symbol.as_str())
        .collect::<Vec<_>>()
        .join(",")
}

/// Plain-text form, e.g. `sum_{m,c} (sum_{a'} p(Y|m,a',c) p(a'|c)) p(m|a,c) p(c)`.
pub fn render_text(e: &Expr) -> String {
    match e {
        Expr::Factor(f) => text_factor(f),
        Expr::Product(ts) if ts.is_empty() => "1".into(),
        Expr::Product(ts) => ts
            .iter()
            .map(|t| match t {
                Expr::Factor(_) => render_text(t),
                Expr::Product(inner) if inner.is_empty() => "1".into(),
                _ => format!("({})", render_text(t)),
            })
            .collect::<Vec<_>>()
            .join(" "),
        Expr::Quotient(n, d) => format!("{} / {}", text_side(n), text_side(d)),
        Expr::Sum { over, body } => format!("sum_{{{}}} {}", text_indices(over), render_text(body)),
        Expr::Marginal { over, body } => {
            format!("sum_{{{}}} {}", text_indices(over), render_text(body))
        }
    }
}

fn text_side(e: &Expr) -> String {
    match e {
        Expr::Factor(_) => render_text(e),
        _ if e.is_one() => "1".into(),
        _ => format!("({})", render_text(e)),
    }
}

/// TeX-safe name. A trailing run of digits after a letter becomes a subscript
/// (`A1` renders as `A_{1}`); primes pass through.
fn latex_name(name: &str) -> String {
    let core = name.trim_end_matches('\'');
    let primes = &name[core.len()..];
    let digits = core.len() - core.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let (stem, sub) = core.split_at(core.len() - digits);
    let escaped = escape(stem);
    let stem_tex = if stem.chars().count() > 1 {
        format!("\\mathrm{{{escaped}}}")
    } else {
        escaped
    };
    if sub.is_empty() || stem.is_empty() {
        format!("{stem_tex}{sub}{primes}")
    } else {
        format!("{stem_tex}_{{{sub}}}{primes}")
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '_' | '#' | '%' | '&' | '$' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            '\\' => out.push_str("\\backslash{}"),
            '^' => out.push_str("\\hat{}"),
            '~' => out.push_str("\\sim{}"),
            _ => out.push(c),
        }
    }
    out
}

fn latex_arg(a: &Arg) -> String {
    match &a.value {
        Value::Var(s) => latex_name(s),
        Value::Level(l) => format!("{} = {l}", latex_name(a.vertex.as_str())),
    }
}

fn latex_factor(f: &Factor) -> String {
    let targets: Vec<String> = f.targets.iter().map(latex_arg).collect();
    if f.given.is_empty() {
        format!("p({})", targets.join(", "))
    } else {
        let given: Vec<String> = f.given.iter().map(latex_arg).collect();
        format!("p({} \\mid {})", targets.join(", "), given.join(", "))
    }
}

/// Math-mode LaTeX body (no surrounding `$`).
pub fn render_latex(e: &Expr) -> String {
    match e {
        Expr::Factor(f) => latex_factor(f),
        Expr::Product(ts) if ts.is_empty() => "1".into(),
        Expr::Product(ts) => ts
            .iter()
            .map(|t| match t {
                Expr::Factor(_) | Expr::Quotient(..) => render_latex(t),
                _ => format!("\\left( {} \\right)", render_latex(t)),
            })
            .collect::<Vec<_>>()
            .join(" \\, "),
        Expr::Quotient(n, d) => format!("\\frac{{{}}}{{{}}}", render_latex(n), render_latex(d)),
        Expr::Sum { over, body } | Expr::Marginal { over, body } => {
            let idx: Vec<String> = over.iter().map(|b| latex_name(&b.symbol)).collect();
            format!("\\sum_{{{}}} {}", idx.join(", "), render_latex(body))
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_text(self))
    }
}

impl Estimand {
    pub fn render_text(&self) -> String {
        render_text(&self.expr)
    }

    pub fn render_latex(&self) -> String {
        render_latex(&self.expr)
    }

    /// A complete document that compiles with `pdflatex`.
    pub fn latex_document(&self) -> String {
        format!(
            "\\documentclass{{article}}\n\\usepackage{{amsmath}}\n\\begin{{document}}\n\\[\n{}\n\\]\n\\end{{document}}\n",
            self.render_latex()
        )
    }
}

impl fmt::Display for Estimand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_text())
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::front_door_textbook_form;
    use super::*;
    use crate::graph::Vertex;

    #[test]
    fn front_door_text() {
        assert_eq!(
            front_door_textbook_form().render_text(),
            "sum_{m,c} (sum_{a'} p(Y|m,a',c) p(a'|c)) p(m|a,c) p(c)"
        );
    }

    #[test]
    fn small_forms() {
        let c = Vertex::new("C").unwrap();
        let f = Expr::factor(vec![Arg::var(c.clone(), "C")], vec![]);
        assert_eq!(f.to_string(), "p(C)");
        assert_eq!(Expr::one().to_string(), "1");
        let q = Expr::quotient(f.clone(), Expr::product(vec![f.clone(), f.clone()]));
        assert_eq!(q.to_string(), "p(C) / (p(C) p(C))");
        let lvl = Expr::factor(vec![Arg::level(c, 1)], vec![]);
        assert_eq!(lvl.to_string(), "p(C=1)");
    }

    #[test]
    fn latex_forms() {
        assert_eq!(latex_name("A1"), "A_{1}");
        assert_eq!(latex_name("a1'"), "a_{1}'");
        assert_eq!(latex_name("age_2"), "\\mathrm{age\\_}_{2}");
        assert_eq!(latex_name("7"), "7");
        let tex = front_door_textbook_form().render_latex();
        assert_eq!(
            tex,
            "\\sum_{m, c} \\left( \\sum_{a'} p(Y \\mid m, a', c) \\, p(a' \\mid c) \\right) \\, p(m \\mid a, c) \\, p(c)"
        );
        assert!(front_door_textbook_form()
            .latex_document()
            .contains("\\begin{document}"));
    }
}
