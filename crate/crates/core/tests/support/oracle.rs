//! Brute-force feature extraction straight from the sqlparser AST.
//!
//! Deliberately naive: it re-resolves every identifier by scanning scopes,
//! rewrites column references to `table.column` and prints expressions with
//! sqlparser's own `Display`. It only supports the shapes used by the
//! fixture corpus (non-recursive CTEs, derived tables, JOIN ... ON, comma
//! joins, set operations, subqueries in expressions).

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use sqlparser::ast::*;
use sqlparser::dialect::PostgreSqlDialect;
use sqlparser::parser::Parser;

pub type Schema = BTreeMap<String, Vec<String>>;

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct OracleFeatures {
    pub cols_select: BTreeSet<String>,
    pub cols_all: BTreeSet<String>,
    pub relations: BTreeSet<String>,
    pub where_preds: BTreeSet<String>,
    pub join_pairs: BTreeSet<String>,
    pub aggregations: BTreeSet<String>,
    pub functions: BTreeSet<String>,
    pub ctes: usize,
    pub subqueries: usize,
    pub func_exprs: usize,
}

type Cols = BTreeSet<(String, String)>;

#[derive(Clone, Debug)]
struct Source {
    alias: String,
    table: Option<String>,
    outputs: Vec<(String, Cols)>,
    base_tables: BTreeSet<String>,
}

/// name, output columns, base tables
type CteDef = (String, Vec<(String, Cols)>, BTreeSet<String>);

#[derive(Clone, Default)]
struct Env {
    scopes: Vec<Vec<Source>>,
    ctes: Vec<CteDef>,
}

const AGGS: &[&str] = &["AVG", "COUNT", "MAX", "MIN", "SUM", "STDDEV", "STDDEV_SAMP", "VARIANCE"];

pub fn parse_schema(ddl: &str) -> Schema {
    let mut out = Schema::new();
    for stmt in Parser::parse_sql(&PostgreSqlDialect {}, ddl).expect("ddl") {
        if let Statement::CreateTable(ct) = stmt {
            let cols = ct.columns.iter().map(|c| c.name.value.to_lowercase()).collect();
            out.insert(ct.name.to_string().to_lowercase(), cols);
        }
    }
    out
}

pub fn analyze(sql: &str, schema: &Schema) -> OracleFeatures {
    let stmt = Parser::parse_sql(&PostgreSqlDialect {}, sql).expect("fixture parses").remove(0);
    let Statement::Query(q) = stmt else { panic!("not a query") };
    let mut o = Oracle { schema, f: OracleFeatures::default(), cores: 0 };
    o.query(&q, &Env::default());
    o.f.subqueries = o.cores - 1;
    o.f
}

struct Oracle<'s> {
    schema: &'s Schema,
    f: OracleFeatures,
    cores: usize,
}

fn col(t: &str, c: &str) -> String {
    format!("{t}.{c}")
}

impl Oracle<'_> {
    /// Analyze a query and return its output columns and base tables.
    fn query(&mut self, q: &Query, env: &Env) -> (Vec<(String, Cols)>, BTreeSet<String>) {
        let mut env = env.clone();
        if let Some(with) = &q.with {
            for cte in &with.cte_tables {
                self.f.ctes += 1;
                let (outs, tables) = self.query(&cte.query, &env);
                env.ctes.push((cte.alias.name.value.to_lowercase(), outs, tables));
            }
        }
        if let SetExpr::Select(sel) = q.body.as_ref() {
            let order_by: Vec<&Expr> = match q.order_by.as_ref().map(|o| &o.kind) {
                Some(OrderByKind::Expressions(items)) => items.iter().map(|i| &i.expr).collect(),
                _ => vec![],
            };
            return self.select(sel, &env, &order_by);
        }
        self.set_expr(&q.body, &env)
    }

    fn set_expr(&mut self, s: &SetExpr, env: &Env) -> (Vec<(String, Cols)>, BTreeSet<String>) {
        match s {
            SetExpr::Select(sel) => self.select(sel, env, &[]),
            SetExpr::Query(q) => self.query(q, env),
            SetExpr::SetOperation { left, right, .. } => {
                let (mut lo, mut lt) = self.set_expr(left, env);
                let (ro, rt) = self.set_expr(right, env);
                for (i, (_, cols)) in lo.iter_mut().enumerate() {
                    if let Some((_, r)) = ro.get(i) {
                        cols.extend(r.iter().cloned());
                    }
                }
                lt.extend(rt);
                (lo, lt)
            }
            other => panic!("unsupported set expression {other}"),
        }
    }

    fn source(&mut self, tf: &TableFactor, env: &Env) -> Source {
        match tf {
            TableFactor::Table { name, alias, .. } => {
                let n = name.to_string().to_lowercase();
                let alias_name = alias.as_ref().map(|a| a.name.value.to_lowercase()).unwrap_or(n.clone());
                if let Some((_, outs, tables)) = env.ctes.iter().rev().find(|(c, _, _)| *c == n) {
                    return Source {
                        alias: alias_name,
                        table: None,
                        outputs: outs.clone(),
                        base_tables: tables.clone(),
                    };
                }
                self.f.relations.insert(n.clone());
                let cols = self.schema.get(&n).unwrap_or_else(|| panic!("unknown table {n}"));
                let outputs = cols.iter().map(|c| (c.clone(), BTreeSet::from([(n.clone(), c.clone())]))).collect();
                Source { alias: alias_name, table: Some(n.clone()), outputs, base_tables: BTreeSet::from([n]) }
            }
            TableFactor::Derived { subquery, alias, .. } => {
                let (outputs, base_tables) = self.query(subquery, env);
                let alias = alias.as_ref().expect("derived alias").name.value.to_lowercase();
                Source { alias, table: None, outputs, base_tables }
            }
            other => panic!("unsupported table factor {other}"),
        }
    }

    fn select(&mut self, sel: &Select, env: &Env, order_by: &[&Expr]) -> (Vec<(String, Cols)>, BTreeSet<String>) {
        self.cores += 1;
        // Sources first, so that join conditions see everything to their left.
        let mut sources = Vec::new();
        let mut joins: Vec<(Vec<usize>, usize, &Expr)> = Vec::new();
        for twj in &sel.from {
            sources.push(self.source(&twj.relation, env));
            for j in &twj.joins {
                let left: Vec<usize> = (0..sources.len()).collect();
                sources.push(self.source(&j.relation, env));
                let constraint = match &j.join_operator {
                    JoinOperator::Join(c)
                    | JoinOperator::Inner(c)
                    | JoinOperator::Left(c)
                    | JoinOperator::LeftOuter(c)
                    | JoinOperator::Right(c)
                    | JoinOperator::RightOuter(c)
                    | JoinOperator::FullOuter(c) => c,
                    other => panic!("unsupported join {other:?}"),
                };
                if let JoinConstraint::On(e) = constraint {
                    joins.push((left, sources.len() - 1, e));
                }
            }
        }
        let mut scope_env = env.clone();
        scope_env.scopes.push(sources.clone());
        let base_tables: BTreeSet<String> = sources.iter().flat_map(|s| s.base_tables.iter().cloned()).collect();

        let mut outputs = Vec::new();
        let mut select_exprs = Vec::new();
        for item in &sel.projection {
            match item {
                SelectItem::UnnamedExpr(e) => {
                    let name = match e {
                        Expr::Identifier(i) => i.value.to_lowercase(),
                        Expr::CompoundIdentifier(p) => p.last().unwrap().value.to_lowercase(),
                        _ => "?column?".into(),
                    };
                    outputs.push((name, self.columns_of(e, &scope_env)));
                    select_exprs.push(e);
                }
                SelectItem::ExprWithAlias { expr, alias } => {
                    outputs.push((alias.value.to_lowercase(), self.columns_of(expr, &scope_env)));
                    select_exprs.push(expr);
                }
                SelectItem::Wildcard(_) => {
                    for s in &sources {
                        for (n, c) in &s.outputs {
                            self.star(c);
                            outputs.push((n.clone(), c.clone()));
                        }
                    }
                }
                SelectItem::QualifiedWildcard(kind, _) => {
                    let q = kind.to_string().to_lowercase();
                    let s = sources.iter().find(|s| s.alias == q).expect("star qualifier");
                    for (n, c) in &s.outputs {
                        self.star(c);
                        outputs.push((n.clone(), c.clone()));
                    }
                }
            }
        }

        for e in &select_exprs {
            for c in self.columns_of(e, &scope_env) {
                self.f.cols_select.insert(col(&c.0, &c.1));
                self.f.cols_all.insert(col(&c.0, &c.1));
            }
            self.nested(e, &scope_env);
        }
        let group_by: Vec<&Expr> = match &sel.group_by {
            GroupByExpr::Expressions(exprs, _) => exprs.iter().collect(),
            GroupByExpr::All(_) => panic!("GROUP BY ALL"),
        };
        let mut positional: Vec<&Expr> = vec![];
        positional.extend(joins.iter().map(|(_, _, e)| *e));
        positional.extend(sel.selection.iter());
        positional.extend(group_by.iter().copied());
        positional.extend(sel.having.iter());
        for e in &positional {
            for c in self.columns_of(e, &scope_env) {
                self.f.cols_all.insert(col(&c.0, &c.1));
            }
            self.nested(e, &scope_env);
        }

        // Predicates.
        for cond in sel.selection.iter().chain(sel.having.iter()) {
            let mut leaves = Vec::new();
            split(cond, false, &mut leaves);
            for (leaf, neg) in &leaves {
                let t = self.tuple(leaf, *neg, &scope_env);
                self.f.where_preds.insert(t);
                if has_call(leaf) {
                    self.f.func_exprs += 1;
                }
            }
        }

        // Join graph: equalities between columns of two distinct local sources.
        let local = |o: &Self, e: &Expr| -> Vec<(usize, Cols)> {
            let mut out = Vec::new();
            for id in identifiers(e) {
                if let Some((idx, cols)) = o.lookup_local(&id, &sources) {
                    out.push((idx, cols));
                }
            }
            out
        };
        let endpoints = |src: &Source, cols: &Cols| -> BTreeSet<String> {
            match &src.table {
                Some(t) => BTreeSet::from([t.clone()]),
                None => cols.iter().map(|c| c.0.clone()).collect(),
            }
        };
        let mut edges = Vec::new();
        for (left, right, e) in &joins {
            let mut leaves = Vec::new();
            split(e, false, &mut leaves);
            for (leaf, _) in leaves {
                if let Expr::BinaryOp { left: l, op: BinaryOperator::Eq, right: r } = leaf {
                    for (a, ac) in local(self, l) {
                        for (b, bc) in local(self, r) {
                            let (a, ac, b, bc) =
                                if a == *right { (b, bc, a, ac.clone()) } else { (a, ac.clone(), b, bc) };
                            if left.contains(&a) && b == *right {
                                edges.push((a, ac.clone(), b, bc));
                            }
                        }
                    }
                }
            }
        }
        if let Some(w) = &sel.selection {
            let mut leaves = Vec::new();
            split(w, false, &mut leaves);
            for (leaf, neg) in leaves {
                if let Expr::BinaryOp { left: l, op: BinaryOperator::Eq, right: r } = leaf {
                    if neg {
                        continue;
                    }
                    for (a, ac) in local(self, l) {
                        for (b, bc) in local(self, r) {
                            if a != b {
                                edges.push((a, ac.clone(), b, bc));
                            }
                        }
                    }
                }
            }
        }
        for (a, ac, b, bc) in edges {
            for x in endpoints(&sources[a], &ac) {
                for y in endpoints(&sources[b], &bc) {
                    let (p, q) = if x <= y { (x.clone(), y.clone()) } else { (y.clone(), x.clone()) };
                    self.f.join_pairs.insert(format!("({p}, {q})"));
                }
            }
        }

        // Aggregations and functions over every expression of the core.
        let mut group_cols = BTreeSet::new();
        for g in &group_by {
            let target = match g {
                Expr::Value(v) => match &v.value {
                    Value::Number(n, _) => select_exprs.get(n.parse::<usize>().unwrap() - 1).copied().unwrap(),
                    _ => g,
                },
                _ => g,
            };
            for c in self.columns_of(target, &scope_env) {
                group_cols.insert(col(&c.0, &c.1));
            }
        }
        let group_text = group_cols.into_iter().collect::<Vec<_>>().join(", ");
        let mut everything: Vec<&Expr> = select_exprs.clone();
        everything.extend(positional.iter().copied());
        everything.extend(order_by.iter().copied());
        for e in &everything {
            for call in calls(e) {
                match call {
                    Call::Function(func) => {
                        let name = func.name.to_string().to_uppercase();
                        if AGGS.contains(&name.as_str()) && func.over.is_none() {
                            let arg = self.agg_arg(&func, &scope_env);
                            self.f.aggregations.insert(format!("<{name}, {arg}, [{group_text}]>"));
                        }
                        self.f.functions.insert(name);
                    }
                    Call::Named(n) => {
                        self.f.functions.insert(n.into());
                    }
                }
            }
        }
        for e in select_exprs.iter().chain(group_by.iter()) {
            if has_call(e) {
                self.f.func_exprs += 1;
            }
        }
        (outputs, base_tables)
    }

    fn star(&mut self, cols: &Cols) {
        for c in cols {
            self.f.cols_select.insert(col(&c.0, &c.1));
            self.f.cols_all.insert(col(&c.0, &c.1));
        }
    }

    /// Analyze subqueries nested in an expression.
    fn nested(&mut self, e: &Expr, env: &Env) {
        for q in subqueries(e) {
            self.query(&q, env);
        }
    }

    fn lookup_local(&self, id: &[String], sources: &[Source]) -> Option<(usize, Cols)> {
        match id {
            [c] => sources
                .iter()
                .enumerate()
                .find_map(|(i, s)| s.outputs.iter().find(|(n, _)| n == c).map(|(_, cols)| (i, cols.clone()))),
            [q, c] => sources
                .iter()
                .enumerate()
                .find(|(_, s)| s.alias == *q)
                .and_then(|(i, s)| s.outputs.iter().find(|(n, _)| n == c).map(|(_, cols)| (i, cols.clone()))),
            _ => None,
        }
    }

    fn resolve(&self, id: &[String], env: &Env) -> Cols {
        for scope in env.scopes.iter().rev() {
            if let Some((_, cols)) = self.lookup_local(id, scope) {
                return cols;
            }
        }
        panic!("oracle cannot resolve {id:?}")
    }

    fn columns_of(&self, e: &Expr, env: &Env) -> Cols {
        identifiers(e).iter().flat_map(|id| self.resolve(id, env)).collect()
    }

    fn render(&self, e: &Expr, env: &Env) -> String {
        let mut e = e.clone();
        let _ = VisitMut::visit(&mut e, &mut Rewriter { oracle: self, env, depth: 0 });
        e.to_string()
    }

    fn agg_arg(&self, f: &Function, env: &Env) -> String {
        let FunctionArguments::List(list) = &f.args else { return String::new() };
        let args: Vec<String> = list
            .args
            .iter()
            .map(|a| match a {
                FunctionArg::Unnamed(FunctionArgExpr::Expr(e)) => self.render(e, env),
                FunctionArg::Unnamed(FunctionArgExpr::Wildcard) => "*".into(),
                other => panic!("unsupported argument {other}"),
            })
            .collect();
        let distinct = matches!(list.duplicate_treatment, Some(DuplicateTreatment::Distinct));
        format!("{}{}", if distinct { "DISTINCT " } else { "" }, args.join(", "))
    }

    fn tuple(&self, leaf: &Expr, neg: bool, env: &Env) -> String {
        let r = |e: &Expr| self.render(strip(e), env);
        let tag = |base: &str, n: bool| if n { format!("NOT {base}") } else { base.to_string() };
        let (pred, exprs): (String, Vec<String>) = match leaf {
            Expr::BinaryOp { left, op, right } if comparison(op).is_some() => {
                let mut op = comparison(op).unwrap();
                if neg {
                    op = match op {
                        "=" => "<>",
                        "<>" => "=",
                        "<" => ">=",
                        ">=" => "<",
                        "<=" => ">",
                        ">" => "<=",
                        _ => unreachable!(),
                    };
                }
                let (a, b) = (r(left), r(right));
                let (ka, kb) = ((is_constant(left), a.clone()), (is_constant(right), b.clone()));
                if ka > kb {
                    let flipped = match op {
                        "<" => ">",
                        ">" => "<",
                        "<=" => ">=",
                        ">=" => "<=",
                        o => o,
                    };
                    (flipped.into(), vec![b, a])
                } else {
                    (op.into(), vec![a, b])
                }
            }
            Expr::Between { expr, negated, low, high } => {
                (tag("BETWEEN", neg != *negated), vec![r(expr), r(low), r(high)])
            }
            Expr::InList { expr, list, negated } => {
                let mut items: Vec<String> = list.iter().map(r).collect();
                items.sort();
                let mut v = vec![r(expr)];
                v.extend(items);
                (tag("IN", neg != *negated), v)
            }
            Expr::InSubquery { expr, subquery, negated } => {
                (tag("IN", neg != *negated), vec![r(expr), format!("({})", self.render_query(subquery, env))])
            }
            Expr::Exists { subquery, negated } => {
                (tag("EXISTS", neg != *negated), vec![format!("({})", self.render_query(subquery, env))])
            }
            Expr::Like { negated, expr, pattern, .. } => (tag("LIKE", neg != *negated), vec![r(expr), r(pattern)]),
            Expr::IsNull(e) => ((if neg { "IS NOT NULL" } else { "IS NULL" }).into(), vec![r(e)]),
            Expr::IsNotNull(e) => ((if neg { "IS NULL" } else { "IS NOT NULL" }).into(), vec![r(e)]),
            other => panic!("oracle has no rule for predicate {other}"),
        };
        let mut s = format!("<{pred}");
        for e in exprs {
            s.push_str(", ");
            s.push_str(&e);
        }
        s.push('>');
        s
    }

    /// Canonical text of a simple subquery: aliases dropped, columns as
    /// `table.column`. Supports a single SELECT core over base tables.
    fn render_query(&self, q: &Query, env: &Env) -> String {
        let SetExpr::Select(sel) = q.body.as_ref() else { panic!("oracle renders only simple subqueries") };
        let mut sel = sel.as_ref().clone();
        let mut sources = Vec::new();
        for twj in &mut sel.from {
            assert!(twj.joins.is_empty(), "oracle renders only join-free subqueries");
            let TableFactor::Table { name, alias, .. } = &mut twj.relation else { panic!("base tables only") };
            let n = name.to_string().to_lowercase();
            let a = alias.take().map(|a| a.name.value.to_lowercase()).unwrap_or(n.clone());
            let cols = &self.schema[&n];
            sources.push(Source {
                alias: a,
                table: Some(n.clone()),
                outputs: cols.iter().map(|c| (c.clone(), BTreeSet::from([(n.clone(), c.clone())]))).collect(),
                base_tables: BTreeSet::from([n]),
            });
        }
        let mut inner = env.clone();
        inner.scopes.push(sources);
        for item in &mut sel.projection {
            let rewritten = match &*item {
                SelectItem::UnnamedExpr(e) | SelectItem::ExprWithAlias { expr: e, .. } => {
                    SelectItem::UnnamedExpr(parse_expr(&self.render(e, &inner)))
                }
                other => other.clone(),
            };
            *item = rewritten;
        }
        if let Some(w) = &mut sel.selection {
            *w = parse_expr(&self.render(w, &inner));
        }
        sel.to_string()
    }
}

fn parse_expr(s: &str) -> Expr {
    Parser::new(&PostgreSqlDialect {}).try_with_sql(s).unwrap().parse_expr().unwrap()
}

fn strip(e: &Expr) -> &Expr {
    match e {
        Expr::Nested(inner) => strip(inner),
        other => other,
    }
}

fn comparison(op: &BinaryOperator) -> Option<&'static str> {
    Some(match op {
        BinaryOperator::Eq => "=",
        BinaryOperator::NotEq => "<>",
        BinaryOperator::Lt => "<",
        BinaryOperator::LtEq => "<=",
        BinaryOperator::Gt => ">",
        BinaryOperator::GtEq => ">=",
        _ => return None,
    })
}

fn split<'a>(e: &'a Expr, neg: bool, out: &mut Vec<(&'a Expr, bool)>) {
    match e {
        Expr::Nested(inner) => split(inner, neg, out),
        Expr::BinaryOp { left, op: BinaryOperator::And | BinaryOperator::Or, right } => {
            split(left, neg, out);
            split(right, neg, out);
        }
        Expr::UnaryOp { op: UnaryOperator::Not, expr } => split(expr, !neg, out),
        leaf => out.push((leaf, neg)),
    }
}

/// Column identifiers of an expression, outside nested subqueries.
fn identifiers(e: &Expr) -> Vec<Vec<String>> {
    let mut v = Collect { depth: 0, ids: vec![], calls: vec![], queries: vec![] };
    let _ = e.visit(&mut v);
    v.ids
}

enum Call {
    Function(Box<Function>),
    Named(&'static str),
}

fn calls(e: &Expr) -> Vec<Call> {
    let mut v = Collect { depth: 0, ids: vec![], calls: vec![], queries: vec![] };
    let _ = e.visit(&mut v);
    v.calls
}

fn has_call(e: &Expr) -> bool {
    !calls(e).is_empty()
}

fn subqueries(e: &Expr) -> Vec<Query> {
    let mut v = Collect { depth: 0, ids: vec![], calls: vec![], queries: vec![] };
    let _ = e.visit(&mut v);
    v.queries
}

fn is_constant(e: &Expr) -> bool {
    identifiers(e).is_empty() && subqueries(e).is_empty()
}

struct Collect {
    depth: usize,
    ids: Vec<Vec<String>>,
    calls: Vec<Call>,
    queries: Vec<Query>,
}

impl Visitor for Collect {
    type Break = ();

    fn pre_visit_query(&mut self, q: &Query) -> ControlFlow<()> {
        if self.depth == 0 {
            self.queries.push(q.clone());
        }
        self.depth += 1;
        ControlFlow::Continue(())
    }

    fn post_visit_query(&mut self, _q: &Query) -> ControlFlow<()> {
        self.depth -= 1;
        ControlFlow::Continue(())
    }

    fn pre_visit_expr(&mut self, e: &Expr) -> ControlFlow<()> {
        if self.depth > 0 {
            return ControlFlow::Continue(());
        }
        match e {
            Expr::Identifier(i) => self.ids.push(vec![i.value.to_lowercase()]),
            Expr::CompoundIdentifier(p) => self.ids.push(p.iter().map(|i| i.value.to_lowercase()).collect()),
            Expr::Function(f) => self.calls.push(Call::Function(Box::new(f.clone()))),
            Expr::Cast { .. } => self.calls.push(Call::Named("CAST")),
            Expr::Extract { .. } => self.calls.push(Call::Named("EXTRACT")),
            Expr::Substring { .. } => self.calls.push(Call::Named("SUBSTRING")),
            _ => {}
        }
        ControlFlow::Continue(())
    }
}

struct Rewriter<'a, 's> {
    oracle: &'a Oracle<'s>,
    env: &'a Env,
    depth: usize,
}

impl VisitorMut for Rewriter<'_, '_> {
    type Break = ();

    fn pre_visit_query(&mut self, _q: &mut Query) -> ControlFlow<()> {
        self.depth += 1;
        ControlFlow::Continue(())
    }

    fn post_visit_query(&mut self, _q: &mut Query) -> ControlFlow<()> {
        self.depth -= 1;
        ControlFlow::Continue(())
    }

    fn post_visit_expr(&mut self, e: &mut Expr) -> ControlFlow<()> {
        if self.depth > 0 {
            return ControlFlow::Continue(());
        }
        let id: Option<Vec<String>> = match e {
            Expr::Identifier(i) => Some(vec![i.value.to_lowercase()]),
            Expr::CompoundIdentifier(p) => Some(p.iter().map(|i| i.value.to_lowercase()).collect()),
            _ => None,
        };
        if let Some(id) = id {
            let cols = self.oracle.resolve(&id, self.env);
            assert_eq!(cols.len(), 1, "oracle renders single-column references only");
            let (t, c) = cols.into_iter().next().unwrap();
            *e = Expr::CompoundIdentifier(vec![Ident::new(t), Ident::new(c)]);
        }
        match e {
            Expr::Function(f) => f.name = ObjectName::from(vec![Ident::new(f.name.to_string().to_uppercase())]),
            Expr::Value(v) => {
                if let Value::Number(n, l) = &v.value {
                    if n.contains('.') {
                        let t = n.trim_end_matches('0').trim_end_matches('.').to_string();
                        v.value = Value::Number(t, *l);
                    }
                }
            }
            Expr::Subquery(q) | Expr::InSubquery { subquery: q, .. } | Expr::Exists { subquery: q, .. } => {
                let text = self.oracle.render_query(q, self.env);
                **q = parse_query(&text);
            }
            _ => {}
        }
        ControlFlow::Continue(())
    }
}

fn parse_query(s: &str) -> Query {
    match Parser::parse_sql(&PostgreSqlDialect {}, s).unwrap().remove(0) {
        Statement::Query(q) => *q,
        _ => unreachable!(),
    }
}
