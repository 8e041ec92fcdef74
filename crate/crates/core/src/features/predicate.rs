use std::fmt;

use serde::Serialize;

use crate::frontend::render::Renderer;
use crate::frontend::{BinaryOp, Expr, Quantifier, UnaryOp};

/// `⟨pred, expr_1, …⟩` for one basic predicate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PredicateTuple {
    pub pred: String,
    pub exprs: Vec<String>,
}

impl PredicateTuple {
    pub fn new(pred: impl Into<String>, exprs: Vec<String>) -> Self {
        PredicateTuple { pred: pred.into(), exprs }
    }
}

impl fmt::Display for PredicateTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}", self.pred)?;
        for e in &self.exprs {
            write!(f, ", {e}")?;
        }
        f.write_str(">")
    }
}

/// Split a condition at AND and OR into basic predicates. NOT is pushed
/// inward; each leaf comes with its accumulated negation.
pub fn basic_predicates(e: &Expr) -> Vec<(&Expr, bool)> {
    let mut out = Vec::new();
    split(e, false, &mut out);
    out
}

fn split<'a>(e: &'a Expr, negated: bool, out: &mut Vec<(&'a Expr, bool)>) {
    match e.unnested() {
        Expr::Binary { left, op: BinaryOp::And | BinaryOp::Or, right } => {
            split(left, negated, out);
            split(right, negated, out);
        }
        Expr::Unary { op: UnaryOp::Not, expr } => split(expr, !negated, out),
        leaf => out.push((leaf, negated)),
    }
}

fn negate_comparison(op: &BinaryOp) -> BinaryOp {
    match op {
        BinaryOp::Eq => BinaryOp::NotEq,
        BinaryOp::NotEq => BinaryOp::Eq,
        BinaryOp::Lt => BinaryOp::GtEq,
        BinaryOp::GtEq => BinaryOp::Lt,
        BinaryOp::LtEq => BinaryOp::Gt,
        BinaryOp::Gt => BinaryOp::LtEq,
        other => other.clone(),
    }
}

fn mirror(op: &BinaryOp) -> BinaryOp {
    match op {
        BinaryOp::Lt => BinaryOp::Gt,
        BinaryOp::Gt => BinaryOp::Lt,
        BinaryOp::LtEq => BinaryOp::GtEq,
        BinaryOp::GtEq => BinaryOp::LtEq,
        other => other.clone(),
    }
}

fn tag(base: &str, negated: bool) -> String {
    if negated {
        format!("NOT {base}")
    } else {
        base.to_string()
    }
}

/// Operands without column references or subqueries order after those with.
fn is_constant(e: &Expr) -> bool {
    let mut constant = true;
    e.walk(&mut |x| {
        if matches!(x, Expr::Column(_) | Expr::Subquery(_) | Expr::Exists { .. } | Expr::InSubquery { .. }) {
            constant = false;
        }
    });
    constant
}

pub(crate) fn predicate_tuple(leaf: &Expr, negated: bool, r: &Renderer<'_>) -> PredicateTuple {
    let op = |e: &Expr| r.expr(e.unnested());
    match leaf {
        Expr::Binary { left, op: bin, right } if bin.is_comparison() => {
            let bin = if negated { negate_comparison(bin) } else { bin.clone() };
            let (mut a, mut b) = (op(left), op(right));
            let mut bin = bin;
            if (is_constant(left), &a) > (is_constant(right), &b) {
                std::mem::swap(&mut a, &mut b);
                bin = mirror(&bin);
            }
            PredicateTuple::new(bin.symbol(), vec![a, b])
        }
        Expr::Binary { left, op: bin, right } => {
            PredicateTuple::new(tag(bin.symbol(), negated), vec![op(left), op(right)])
        }
        Expr::Between { expr, low, high, negated: n } => {
            PredicateTuple::new(tag("BETWEEN", negated != *n), vec![op(expr), op(low), op(high)])
        }
        Expr::InList { expr, list, negated: n } => {
            let mut items: Vec<String> = list.iter().map(op).collect();
            items.sort();
            let mut exprs = vec![op(expr)];
            exprs.extend(items);
            PredicateTuple::new(tag("IN", negated != *n), exprs)
        }
        Expr::InSubquery { expr, query, negated: n } => {
            PredicateTuple::new(tag("IN", negated != *n), vec![op(expr), format!("({})", r.node(*query))])
        }
        Expr::Exists { query, negated: n } => {
            PredicateTuple::new(tag("EXISTS", negated != *n), vec![format!("({})", r.node(*query))])
        }
        Expr::IsNull { expr, negated: n } => {
            PredicateTuple::new(if negated != *n { "IS NOT NULL" } else { "IS NULL" }, vec![op(expr)])
        }
        Expr::IsBool { expr, value, negated: n } => {
            let v = if *value { "TRUE" } else { "FALSE" };
            let t = if negated != *n { format!("IS NOT {v}") } else { format!("IS {v}") };
            PredicateTuple::new(t, vec![op(expr)])
        }
        Expr::IsDistinctFrom { left, right, negated: n } => {
            let mut exprs = vec![(is_constant(left), op(left)), (is_constant(right), op(right))];
            exprs.sort();
            let exprs = exprs.into_iter().map(|(_, e)| e).collect();
            let t = if negated != *n { "IS NOT DISTINCT FROM" } else { "IS DISTINCT FROM" };
            PredicateTuple::new(t, exprs)
        }
        Expr::Like { expr, pattern, negated: n, case_insensitive, escape } => {
            let base = if *case_insensitive { "ILIKE" } else { "LIKE" };
            let mut exprs = vec![op(expr), op(pattern)];
            if let Some(esc) = escape {
                exprs.push(crate::frontend::render::quote_string(esc));
            }
            PredicateTuple::new(tag(base, negated != *n), exprs)
        }
        Expr::Quantified { left, op: bin, quantifier, right } => {
            let q = match quantifier {
                Quantifier::Any => "ANY",
                Quantifier::All => "ALL",
            };
            PredicateTuple::new(tag(&format!("{} {q}", bin.symbol()), negated), vec![op(left), op(right)])
        }
        other => PredicateTuple::new(if negated { "NOT" } else { "EXPR" }, vec![op(other)]),
    }
}
