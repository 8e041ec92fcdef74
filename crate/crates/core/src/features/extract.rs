use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use super::predicate::{basic_predicates, predicate_tuple, PredicateTuple};
use super::{AggTuple, Bag, FeatureOptions, FeatureVector, JoinPair};
use crate::catalog::CanonicalColumn;
use crate::frontend::render::Renderer;
use crate::frontend::{
    BinaryOp, Expr, FromItem, FunctionCall, JoinConstraint, Literal, NodeId, QueryNode, QueryTree, SelectItem,
};
use crate::resolve::{Scope, SourceKind};

const AGGREGATES: &[&str] = &[
    "ANY_VALUE",
    "ARRAY_AGG",
    "AVG",
    "BIT_AND",
    "BIT_OR",
    "BOOL_AND",
    "BOOL_OR",
    "CORR",
    "COUNT",
    "COVAR_POP",
    "COVAR_SAMP",
    "EVERY",
    "GROUP_CONCAT",
    "JSONB_AGG",
    "JSON_AGG",
    "LISTAGG",
    "MAX",
    "MEDIAN",
    "MIN",
    "REGR_AVGX",
    "REGR_AVGY",
    "REGR_COUNT",
    "REGR_INTERCEPT",
    "REGR_R2",
    "REGR_SLOPE",
    "REGR_SXX",
    "REGR_SXY",
    "REGR_SYY",
    "STDDEV",
    "STDDEV_POP",
    "STDDEV_SAMP",
    "STRING_AGG",
    "SUM",
    "TOTAL",
    "VARIANCE",
    "VAR_POP",
    "VAR_SAMP",
    "XMLAGG",
];

/// Whether `name` (uppercased) is an aggregate function.
pub fn is_aggregate(name: &str) -> bool {
    AGGREGATES.binary_search(&name).is_ok()
}

/// Computes features over a resolved tree; one instance shares a rendering
/// cache across extractors.
pub struct FeatureExtractor<'t> {
    tree: &'t QueryTree,
    scopes: &'t [Scope],
    render: Renderer<'t>,
    options: FeatureOptions,
}

impl<'t> FeatureExtractor<'t> {
    pub fn new(tree: &'t QueryTree, options: FeatureOptions) -> Self {
        let scopes = tree.resolution().map(|r| r.scopes.as_slice()).unwrap_or(&[]);
        FeatureExtractor { tree, scopes, render: tree.canonical_renderer(), options }
    }

    fn bag<T: Ord>(&self) -> Bag<T> {
        Bag::new(self.options.multiset)
    }

    fn node(&self, id: NodeId) -> &'t QueryNode {
        self.tree.node(id)
    }

    fn scope(&self, id: NodeId) -> Option<&'t Scope> {
        self.scopes.get(id.0)
    }

    pub fn vector(&self, id: NodeId) -> FeatureVector {
        FeatureVector {
            cols_select: self.cols_select(id),
            cols_all: self.cols_all(id),
            relations: self.relations(id),
            where_preds: self.where_preds(id),
            join_pairs: self.join_pairs(id),
            aggregations: self.aggregations(id),
            functions: self.functions(id),
            cte_count: self.cte_count(id),
            subquery_count: self.tree.descendants(id).len(),
            func_expr_count: self.func_expr_count(id),
        }
    }

    pub fn cols_select(&self, id: NodeId) -> Bag<CanonicalColumn> {
        let mut bag = self.bag();
        for n in self.tree.subtree(id) {
            for e in select_exprs(self.node(n)) {
                bound_columns(e, &mut |c| bag.insert(c.clone()));
            }
            if let Some(scope) = self.scope(n) {
                scope.star_columns.iter().for_each(|c| bag.insert(c.clone()));
            }
        }
        bag
    }

    pub fn cols_all(&self, id: NodeId) -> Bag<CanonicalColumn> {
        let mut bag = self.bag();
        for n in self.tree.subtree(id) {
            let node = self.node(n);
            let mut exprs = select_exprs(node);
            node.from.iter().for_each(|f| join_conditions(f, &mut exprs));
            exprs.extend(node.where_pred.iter());
            exprs.extend(node.group_by.iter());
            exprs.extend(node.having.iter());
            for e in exprs {
                bound_columns(e, &mut |c| bag.insert(c.clone()));
            }
            if let Some(scope) = self.scope(n) {
                scope.star_columns.iter().for_each(|c| bag.insert(c.clone()));
                for link in &scope.join_links {
                    link.left_columns.iter().chain(&link.right_columns).for_each(|c| bag.insert(c.clone()));
                }
            }
        }
        bag
    }

    pub fn relations(&self, id: NodeId) -> Bag<String> {
        let mut bag = self.bag();
        for n in self.tree.subtree(id) {
            for source in self.scope(n).map(|s| s.sources.as_slice()).unwrap_or(&[]) {
                if let SourceKind::Table { name, .. } = &source.kind {
                    bag.insert(name.clone());
                }
            }
        }
        bag
    }

    pub fn where_preds(&self, id: NodeId) -> Bag<PredicateTuple> {
        let mut bag = self.bag();
        for n in self.tree.subtree(id) {
            let node = self.node(n);
            for cond in node.where_pred.iter().chain(node.having.iter()) {
                for (leaf, negated) in basic_predicates(cond) {
                    bag.insert(predicate_tuple(leaf, negated, &self.render));
                }
            }
        }
        bag
    }

    pub fn join_pairs(&self, id: NodeId) -> Bag<JoinPair> {
        let mut bag = self.bag();
        for n in self.tree.subtree(id) {
            let node = self.node(n);
            let mut leaf = 0;
            for item in &node.from {
                self.explicit_joins(n, item, &mut leaf, &mut bag);
            }
            let Some(cond) = &node.where_pred else { continue };
            for (pred, negated) in basic_predicates(cond) {
                let Expr::Binary { left, op, right } = pred else { continue };
                let equality = matches!((op, negated), (BinaryOp::Eq, false) | (BinaryOp::NotEq, true));
                if !equality {
                    continue;
                }
                let l = self.local_refs(n, left);
                let r = self.local_refs(n, right);
                for (a, ac) in &l {
                    for (b, bc) in &r {
                        if a != b {
                            self.add_edge(n, (*a, ac), (*b, bc), &mut bag);
                        }
                    }
                }
            }
        }
        bag
    }

    fn explicit_joins(&self, n: NodeId, item: &FromItem, leaf: &mut usize, bag: &mut Bag<JoinPair>) -> Range<usize> {
        let FromItem::Join { left, right, constraint, .. } = item else {
            *leaf += 1;
            return *leaf - 1..*leaf;
        };
        let l = self.explicit_joins(n, left, leaf, bag);
        let r = self.explicit_joins(n, right, leaf, bag);
        let none = Vec::new();
        let fallback = |bag: &mut Bag<JoinPair>| {
            for a in l.clone() {
                for b in r.clone() {
                    self.add_edge(n, (a, &none), (b, &none), bag);
                }
            }
        };
        match constraint {
            JoinConstraint::On(e) => {
                let refs = self.local_refs(n, e);
                let lrefs: Vec<_> = refs.iter().filter(|(s, _)| l.contains(s)).collect();
                let rrefs: Vec<_> = refs.iter().filter(|(s, _)| r.contains(s)).collect();
                if lrefs.is_empty() || rrefs.is_empty() {
                    fallback(bag);
                }
                for (a, ac) in &lrefs {
                    for (b, bc) in &rrefs {
                        self.add_edge(n, (**a, ac), (**b, bc), bag);
                    }
                }
            }
            JoinConstraint::Using(_) | JoinConstraint::Natural => {
                let links: Vec<_> = self
                    .scope(n)
                    .map(|s| s.join_links.iter().filter(|k| l.contains(&k.left) && r.contains(&k.right)).collect())
                    .unwrap_or_default();
                if links.is_empty() {
                    fallback(bag);
                }
                for k in links {
                    self.add_edge(n, (k.left, &k.left_columns), (k.right, &k.right_columns), bag);
                }
            }
            JoinConstraint::None => {}
        }
        l.start..r.end
    }

    /// Sources of node `n` referenced by `e`, with the base columns read
    /// through each.
    fn local_refs(&self, n: NodeId, e: &Expr) -> BTreeMap<usize, Vec<CanonicalColumn>> {
        let mut out: BTreeMap<usize, Vec<CanonicalColumn>> = BTreeMap::new();
        e.walk(&mut |x| {
            if let Expr::Column(c) = x {
                if let Some(b) = &c.binding {
                    if let (Some(scope), Some(source)) = (b.scope, b.source) {
                        if scope == n {
                            out.entry(source).or_default().extend(b.columns.iter().cloned());
                        }
                    }
                }
            }
        });
        out
    }

    fn add_edge(
        &self,
        n: NodeId,
        a: (usize, &Vec<CanonicalColumn>),
        b: (usize, &Vec<CanonicalColumn>),
        bag: &mut Bag<JoinPair>,
    ) {
        let ta = self.endpoints(n, a.0, a.1);
        let tb = self.endpoints(n, b.0, b.1);
        for x in &ta {
            for y in &tb {
                bag.insert(JoinPair::new(x.clone(), y.clone()));
            }
        }
    }

    /// Physical tables a join side stands for: the table itself, or for a
    /// derived or CTE side the tables of the referenced columns, else all
    /// of its base tables.
    fn endpoints(&self, n: NodeId, source: usize, columns: &[CanonicalColumn]) -> BTreeSet<String> {
        let Some(src) = self.scope(n).and_then(|s| s.sources.get(source)) else {
            return BTreeSet::new();
        };
        match &src.kind {
            SourceKind::Table { name, .. } => BTreeSet::from([name.clone()]),
            SourceKind::Cte { body, .. } | SourceKind::Derived { node: body } => {
                let named: BTreeSet<String> =
                    columns.iter().filter(|c| !c.table.starts_with('?')).map(|c| c.table.clone()).collect();
                if named.is_empty() {
                    self.base_tables(*body)
                } else {
                    named
                }
            }
        }
    }

    fn base_tables(&self, id: NodeId) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for n in self.tree.subtree(id) {
            for source in self.scope(n).map(|s| s.sources.as_slice()).unwrap_or(&[]) {
                match &source.kind {
                    SourceKind::Table { name, .. } => {
                        out.insert(name.clone());
                    }
                    SourceKind::Cte { body, .. } => out.extend(self.base_tables(*body)),
                    SourceKind::Derived { .. } => {}
                }
            }
        }
        out
    }

    pub fn aggregations(&self, id: NodeId) -> Bag<AggTuple> {
        let mut bag = self.bag();
        for n in self.tree.subtree(id) {
            let node = self.node(n);
            let group_by = self.group_columns(node);
            for e in all_exprs(node) {
                e.walk(&mut |x| {
                    if let Expr::Function(call) = x {
                        if call.over.is_none() && is_aggregate(&call.name) {
                            bag.insert(AggTuple {
                                agg: call.name.clone(),
                                expr: self.agg_argument(call),
                                group_by: group_by.clone(),
                            });
                        }
                    }
                });
            }
        }
        bag
    }

    fn agg_argument(&self, call: &FunctionCall) -> String {
        let mut text = call.args.iter().map(|a| self.render.expr(a)).collect::<Vec<_>>().join(", ");
        if call.distinct {
            text = format!("DISTINCT {text}");
        }
        if let Some(filter) = &call.filter {
            text = format!("{text} FILTER (WHERE {})", self.render.expr(filter));
        }
        text
    }

    fn group_columns(&self, node: &QueryNode) -> Vec<CanonicalColumn> {
        let mut cols = BTreeSet::new();
        for g in &node.group_by {
            let target = match g.unnested() {
                Expr::Literal(Literal::Number(k)) => {
                    k.parse::<usize>().ok().and_then(|k| k.checked_sub(1)).and_then(|k| node.select.get(k)).and_then(
                        |item| match item {
                            SelectItem::Expr { expr, .. } => Some(expr),
                            _ => None,
                        },
                    )
                }
                _ => None,
            };
            bound_columns(target.unwrap_or(g), &mut |c| {
                cols.insert(c.clone());
            });
        }
        cols.into_iter().collect()
    }

    pub fn functions(&self, id: NodeId) -> Bag<String> {
        let mut bag = self.bag();
        for n in self.tree.subtree(id) {
            for e in all_exprs(self.node(n)) {
                e.walk(&mut |x| {
                    if let Some(name) = function_name(x) {
                        bag.insert(name.to_string());
                    }
                });
            }
        }
        bag
    }

    pub fn func_expr_count(&self, id: NodeId) -> usize {
        let mut count = 0;
        for n in self.tree.subtree(id) {
            let node = self.node(n);
            let mut tops: Vec<&Expr> = select_exprs(node);
            for cond in node.where_pred.iter().chain(node.having.iter()) {
                tops.extend(basic_predicates(cond).into_iter().map(|(e, _)| e));
            }
            tops.extend(node.group_by.iter());
            count += tops.into_iter().filter(|e| contains_call(e)).count();
        }
        count
    }

    pub fn cte_count(&self, id: NodeId) -> usize {
        self.tree.subtree(id).into_iter().map(|n| self.node(n).with.len()).sum()
    }
}

fn select_exprs(node: &QueryNode) -> Vec<&Expr> {
    node.select
        .iter()
        .filter_map(|item| match item {
            SelectItem::Expr { expr, .. } => Some(expr),
            _ => None,
        })
        .collect()
}

fn join_conditions<'a>(item: &'a FromItem, out: &mut Vec<&'a Expr>) {
    if let FromItem::Join { left, right, constraint, .. } = item {
        join_conditions(left, out);
        join_conditions(right, out);
        if let JoinConstraint::On(e) = constraint {
            out.push(e);
        }
    }
}

/// Every expression owned by a node, in clause order.
pub(crate) fn all_exprs(node: &QueryNode) -> Vec<&Expr> {
    let mut out = Vec::new();
    if let Some(crate::frontend::Distinct::On(exprs)) = &node.distinct {
        out.extend(exprs.iter());
    }
    out.extend(select_exprs(node));
    node.from.iter().for_each(|f| join_conditions(f, &mut out));
    out.extend(node.where_pred.iter());
    out.extend(node.group_by.iter());
    out.extend(node.having.iter());
    out.extend(node.order_by.iter().map(|o| &o.expr));
    out.extend(node.limit.iter());
    out.extend(node.offset.iter());
    out
}

fn bound_columns(e: &Expr, f: &mut dyn FnMut(&CanonicalColumn)) {
    e.walk(&mut |x| {
        if let Expr::Column(c) = x {
            if let Some(b) = &c.binding {
                b.columns.iter().for_each(&mut *f);
            }
        }
    });
}

fn function_name(e: &Expr) -> Option<&str> {
    match e {
        Expr::Function(call) => Some(&call.name),
        Expr::Cast { .. } => Some("CAST"),
        _ => None,
    }
}

fn contains_call(e: &Expr) -> bool {
    let mut found = false;
    e.walk(&mut |x| found |= function_name(x).is_some());
    found
}
