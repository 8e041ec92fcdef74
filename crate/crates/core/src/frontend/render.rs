//! SQL text generation from a [`QueryTree`].
//!
//! Two modes share one writer. `Faithful` reproduces the statement so that
//! re-parsing yields a structurally equal tree. `Canonical` is used for
//! feature values: resolved columns print as their base identities, aliases
//! and WITH clauses disappear (CTE references are inlined) and numeric
//! literals are normalized, so the text is stable under alias renaming and
//! reformatting.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt::Write;

use super::ast::*;
use crate::resolve::{Scope, SourceKind};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Faithful,
    Canonical,
}

pub(crate) struct Renderer<'t> {
    nodes: &'t [QueryNode],
    mode: Mode,
    scopes: &'t [Scope],
    cache: RefCell<HashMap<NodeId, String>>,
}

impl<'t> Renderer<'t> {
    pub fn faithful(nodes: &'t [QueryNode]) -> Self {
        Renderer { nodes, mode: Mode::Faithful, scopes: &[], cache: RefCell::default() }
    }

    pub fn canonical(nodes: &'t [QueryNode], scopes: &'t [Scope]) -> Self {
        Renderer { nodes, mode: Mode::Canonical, scopes, cache: RefCell::default() }
    }

    fn canonical_mode(&self) -> bool {
        self.mode == Mode::Canonical
    }

    pub fn node(&self, id: NodeId) -> String {
        if let Some(hit) = self.cache.borrow().get(&id) {
            return hit.clone();
        }
        let mut out = String::new();
        self.write_node(&mut out, id);
        self.cache.borrow_mut().insert(id, out.clone());
        out
    }

    pub fn expr(&self, e: &Expr) -> String {
        let mut out = String::new();
        self.write_expr(&mut out, e);
        out
    }

    fn write_node(&self, out: &mut String, id: NodeId) {
        let node = &self.nodes[id.0];
        if !node.with.is_empty() && !self.canonical_mode() {
            out.push_str("WITH ");
            for (i, cte) in node.with.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{}", cte.name);
                if !cte.columns.is_empty() {
                    out.push_str(&paren_list(&cte.columns));
                }
                out.push_str(" AS (");
                out.push_str(&self.node(cte.body));
                out.push_str(") ");
            }
        }
        out.push_str("SELECT ");
        match &node.distinct {
            None => {}
            Some(Distinct::All) => out.push_str("DISTINCT "),
            Some(Distinct::On(exprs)) => {
                out.push_str("DISTINCT ON (");
                self.write_list(out, exprs);
                out.push_str(") ");
            }
        }
        for (i, item) in node.select.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            match item {
                SelectItem::Wildcard => out.push('*'),
                SelectItem::QualifiedWildcard(parts) => {
                    out.push_str(&dotted(parts));
                    out.push_str(".*");
                }
                SelectItem::Expr { expr, alias } => {
                    self.write_expr(out, expr);
                    if let (Some(alias), false) = (alias, self.canonical_mode()) {
                        let _ = write!(out, " AS {alias}");
                    }
                }
            }
        }
        if !node.from.is_empty() {
            out.push_str(" FROM ");
            let mut leaf = 0;
            for (i, item) in node.from.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                self.write_from(out, id, item, &mut leaf, false);
            }
        }
        if let Some(w) = &node.where_pred {
            out.push_str(" WHERE ");
            self.write_expr(out, w);
        }
        if !node.group_by.is_empty() {
            out.push_str(" GROUP BY ");
            self.write_list(out, &node.group_by);
        }
        if let Some(h) = &node.having {
            out.push_str(" HAVING ");
            self.write_expr(out, h);
        }
        for arm in &node.set_ops {
            let _ = write!(out, " {}{} ", arm.op.keyword(), if arm.all { " ALL" } else { "" });
            let operand = &self.nodes[arm.node.0];
            let wrap = !operand.set_ops.is_empty()
                || (!operand.with.is_empty() && !self.canonical_mode())
                || !operand.order_by.is_empty()
                || operand.limit.is_some()
                || operand.offset.is_some();
            if wrap {
                out.push('(');
            }
            out.push_str(&self.node(arm.node));
            if wrap {
                out.push(')');
            }
        }
        if !node.order_by.is_empty() {
            out.push_str(" ORDER BY ");
            self.write_order(out, &node.order_by);
        }
        if let Some(limit) = &node.limit {
            out.push_str(" LIMIT ");
            self.write_expr(out, limit);
        }
        if let Some(offset) = &node.offset {
            out.push_str(" OFFSET ");
            self.write_expr(out, offset);
        }
    }

    fn write_from(&self, out: &mut String, owner: NodeId, item: &FromItem, leaf: &mut usize, nested: bool) {
        match item {
            FromItem::Table { name, alias } => {
                let cte_body = self.canonical_mode().then(|| self.cte_body_of_leaf(owner, *leaf)).flatten();
                *leaf += 1;
                match cte_body {
                    Some(body) => {
                        out.push('(');
                        out.push_str(&self.node(body));
                        out.push(')');
                    }
                    None => out.push_str(&dotted(name)),
                }
                if !self.canonical_mode() {
                    write_alias(out, alias.as_ref());
                }
            }
            FromItem::Derived { node, alias } => {
                *leaf += 1;
                out.push('(');
                out.push_str(&self.node(*node));
                out.push(')');
                if !self.canonical_mode() {
                    write_alias(out, alias.as_ref());
                }
            }
            FromItem::Join { left, right, kind, constraint } => {
                if nested {
                    out.push('(');
                }
                self.write_from(out, owner, left, leaf, false);
                out.push(' ');
                if matches!(constraint, JoinConstraint::Natural) {
                    out.push_str("NATURAL ");
                }
                out.push_str(kind.keyword());
                out.push(' ');
                self.write_from(out, owner, right, leaf, true);
                match constraint {
                    JoinConstraint::On(e) => {
                        out.push_str(" ON ");
                        self.write_expr(out, e);
                    }
                    JoinConstraint::Using(cols) => {
                        out.push_str(" USING ");
                        out.push_str(&paren_list(cols));
                    }
                    JoinConstraint::Natural | JoinConstraint::None => {}
                }
                if nested {
                    out.push(')');
                }
            }
        }
    }

    fn cte_body_of_leaf(&self, owner: NodeId, leaf: usize) -> Option<NodeId> {
        let scope = self.scopes.get(owner.0)?;
        match scope.sources.get(leaf)?.kind {
            SourceKind::Cte { body, .. } => Some(body),
            _ => None,
        }
    }

    fn write_list(&self, out: &mut String, exprs: &[Expr]) {
        for (i, e) in exprs.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            self.write_expr(out, e);
        }
    }

    fn write_order(&self, out: &mut String, items: &[OrderItem]) {
        for (i, o) in items.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            self.write_expr(out, &o.expr);
            match o.asc {
                Some(true) => out.push_str(" ASC"),
                Some(false) => out.push_str(" DESC"),
                None => {}
            }
            match o.nulls_first {
                Some(true) => out.push_str(" NULLS FIRST"),
                Some(false) => out.push_str(" NULLS LAST"),
                None => {}
            }
        }
    }

    fn write_subquery(&self, out: &mut String, id: NodeId) {
        out.push('(');
        out.push_str(&self.node(id));
        out.push(')');
    }

    fn write_expr(&self, out: &mut String, e: &Expr) {
        match e {
            Expr::Column(c) => match (&c.binding, self.mode) {
                (Some(b), Mode::Canonical) => out.push_str(&b.render),
                _ => {
                    for q in &c.qualifier {
                        let _ = write!(out, "{q}.");
                    }
                    let _ = write!(out, "{}", c.name);
                }
            },
            Expr::Literal(lit) => self.write_literal(out, lit),
            Expr::Wildcard => out.push('*'),
            Expr::Unary { op, expr } => {
                let inner = self.expr(expr);
                match op {
                    UnaryOp::Not => out.push_str("NOT "),
                    UnaryOp::Minus => out.push('-'),
                    UnaryOp::Plus => out.push('+'),
                    UnaryOp::Other(sym) => out.push_str(sym),
                }
                if inner.starts_with(['-', '+']) && !matches!(op, UnaryOp::Not) {
                    out.push(' ');
                }
                out.push_str(&inner);
            }
            Expr::Binary { left, op, right } => {
                self.write_expr(out, left);
                let _ = write!(out, " {} ", op.symbol());
                self.write_expr(out, right);
            }
            Expr::Function(call) => self.write_call(out, call),
            Expr::Case { operand, branches, else_result } => {
                out.push_str("CASE");
                if let Some(op) = operand {
                    out.push(' ');
                    self.write_expr(out, op);
                }
                for (when, then) in branches {
                    out.push_str(" WHEN ");
                    self.write_expr(out, when);
                    out.push_str(" THEN ");
                    self.write_expr(out, then);
                }
                if let Some(e) = else_result {
                    out.push_str(" ELSE ");
                    self.write_expr(out, e);
                }
                out.push_str(" END");
            }
            Expr::Cast { expr, data_type } => {
                out.push_str("CAST(");
                self.write_expr(out, expr);
                let _ = write!(out, " AS {data_type})");
            }
            Expr::Between { expr, low, high, negated } => {
                self.write_expr(out, expr);
                out.push_str(if *negated { " NOT BETWEEN " } else { " BETWEEN " });
                self.write_expr(out, low);
                out.push_str(" AND ");
                self.write_expr(out, high);
            }
            Expr::InList { expr, list, negated } => {
                self.write_expr(out, expr);
                out.push_str(if *negated { " NOT IN (" } else { " IN (" });
                self.write_list(out, list);
                out.push(')');
            }
            Expr::InSubquery { expr, query, negated } => {
                self.write_expr(out, expr);
                out.push_str(if *negated { " NOT IN " } else { " IN " });
                self.write_subquery(out, *query);
            }
            Expr::Exists { query, negated } => {
                out.push_str(if *negated { "NOT EXISTS " } else { "EXISTS " });
                self.write_subquery(out, *query);
            }
            Expr::Subquery(query) => self.write_subquery(out, *query),
            Expr::IsNull { expr, negated } => {
                self.write_expr(out, expr);
                out.push_str(if *negated { " IS NOT NULL" } else { " IS NULL" });
            }
            Expr::IsBool { expr, value, negated } => {
                self.write_expr(out, expr);
                out.push_str(if *negated { " IS NOT " } else { " IS " });
                out.push_str(if *value { "TRUE" } else { "FALSE" });
            }
            Expr::IsDistinctFrom { left, right, negated } => {
                self.write_expr(out, left);
                out.push_str(if *negated { " IS NOT DISTINCT FROM " } else { " IS DISTINCT FROM " });
                self.write_expr(out, right);
            }
            Expr::Like { expr, pattern, negated, case_insensitive, escape } => {
                self.write_expr(out, expr);
                out.push_str(if *negated { " NOT " } else { " " });
                out.push_str(if *case_insensitive { "ILIKE " } else { "LIKE " });
                self.write_expr(out, pattern);
                if let Some(esc) = escape {
                    let _ = write!(out, " ESCAPE {}", quote_string(esc));
                }
            }
            Expr::Quantified { left, op, quantifier, right } => {
                self.write_expr(out, left);
                let q = match quantifier {
                    Quantifier::Any => "ANY",
                    Quantifier::All => "ALL",
                };
                let _ = write!(out, " {} {q}", op.symbol());
                if matches!(**right, Expr::Subquery(_)) {
                    out.push(' ');
                    self.write_expr(out, right);
                } else {
                    out.push('(');
                    self.write_expr(out, right);
                    out.push(')');
                }
            }
            Expr::Nested(inner) => {
                out.push('(');
                self.write_expr(out, inner);
                out.push(')');
            }
            Expr::Tuple(items) => {
                out.push('(');
                self.write_list(out, items);
                out.push(')');
            }
            Expr::Interval { value, unit } => {
                out.push_str("INTERVAL ");
                self.write_expr(out, value);
                if let Some(unit) = unit {
                    let _ = write!(out, " {unit}");
                }
            }
            Expr::Grouping(set) => {
                let (kw, groups) = match set {
                    GroupingSet::Rollup(g) => ("ROLLUP", g),
                    GroupingSet::Cube(g) => ("CUBE", g),
                    GroupingSet::Sets(g) => ("GROUPING SETS", g),
                };
                let _ = write!(out, "{kw} (");
                for (i, group) in groups.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    if group.len() == 1 && !matches!(set, GroupingSet::Sets(_)) {
                        self.write_expr(out, &group[0]);
                    } else {
                        out.push('(');
                        self.write_list(out, group);
                        out.push(')');
                    }
                }
                out.push(')');
            }
        }
    }

    fn write_literal(&self, out: &mut String, lit: &Literal) {
        match lit {
            Literal::Number(n) if self.canonical_mode() => out.push_str(&canonical_number(n)),
            Literal::Number(n) => out.push_str(n),
            Literal::String(s) => out.push_str(&quote_string(s)),
            Literal::Boolean(b) => out.push_str(if *b { "TRUE" } else { "FALSE" }),
            Literal::Null => out.push_str("NULL"),
            Literal::Typed { data_type, value } => {
                let _ = write!(out, "{data_type} {}", quote_string(value));
            }
            Literal::Placeholder(p) => out.push_str(p),
        }
    }

    fn write_call(&self, out: &mut String, call: &FunctionCall) {
        out.push_str(&call.name);
        if !call.has_parens {
            return;
        }
        out.push('(');
        match &call.style {
            CallStyle::Plain => {
                if call.distinct {
                    out.push_str("DISTINCT ");
                }
                self.write_list(out, &call.args);
                if !call.arg_order_by.is_empty() {
                    out.push_str(" ORDER BY ");
                    self.write_order(out, &call.arg_order_by);
                }
            }
            CallStyle::Extract(field) => {
                let _ = write!(out, "{field} FROM ");
                self.write_expr(out, &call.args[0]);
            }
            CallStyle::SubstringFromFor { has_from, has_for } => {
                self.write_expr(out, &call.args[0]);
                let mut next = 1;
                if *has_from {
                    out.push_str(" FROM ");
                    self.write_expr(out, &call.args[next]);
                    next += 1;
                }
                if *has_for {
                    out.push_str(" FOR ");
                    self.write_expr(out, &call.args[next]);
                }
            }
            CallStyle::Trim { trim_where } => {
                if let Some(w) = trim_where {
                    let _ = write!(out, "{w} ");
                }
                if let Some(what) = call.args.get(1) {
                    self.write_expr(out, what);
                    out.push(' ');
                }
                out.push_str("FROM ");
                self.write_expr(out, &call.args[0]);
            }
            CallStyle::Position => {
                self.write_expr(out, &call.args[0]);
                out.push_str(" IN ");
                self.write_expr(out, &call.args[1]);
            }
        }
        out.push(')');
        if let Some(filter) = &call.filter {
            out.push_str(" FILTER (WHERE ");
            self.write_expr(out, filter);
            out.push(')');
        }
        if let Some(w) = &call.over {
            out.push_str(" OVER (");
            let mut sep = "";
            if !w.partition_by.is_empty() {
                out.push_str("PARTITION BY ");
                self.write_list(out, &w.partition_by);
                sep = " ";
            }
            if !w.order_by.is_empty() {
                out.push_str(sep);
                out.push_str("ORDER BY ");
                self.write_order(out, &w.order_by);
                sep = " ";
            }
            if let Some(frame) = &w.frame {
                out.push_str(sep);
                out.push_str(frame);
            }
            out.push(')');
        }
    }
}

fn write_alias(out: &mut String, alias: Option<&TableAlias>) {
    if let Some(alias) = alias {
        let _ = write!(out, " AS {}", alias.name);
        if !alias.columns.is_empty() {
            out.push_str(&paren_list(&alias.columns));
        }
    }
}

fn dotted(parts: &[Ident]) -> String {
    parts.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(".")
}

fn paren_list(idents: &[Ident]) -> String {
    format!("({})", idents.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", "))
}

pub(crate) fn quote_string(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// Normalize numeric literal text: drop leading zeros of the integer part
/// and trailing zeros of the fraction; keep exponents as written (lowercased).
pub fn canonical_number(text: &str) -> String {
    let lower = text.to_ascii_lowercase();
    if lower.contains('e') || lower.starts_with("0x") {
        return lower;
    }
    let (int, frac) = match lower.split_once('.') {
        Some((i, f)) => (i, f),
        None => (lower.as_str(), ""),
    };
    let int = int.trim_start_matches('0');
    let int = if int.is_empty() { "0" } else { int };
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        int.to_string()
    } else {
        format!("{int}.{frac}")
    }
}
