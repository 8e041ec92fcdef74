//! Name resolution: binds every column reference to the base-table columns
//! it reads, following table aliases, CTEs and derived tables.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::catalog::{CanonicalColumn, SchemaCatalog};
use crate::frontend::render::Renderer;
use crate::frontend::{Binding, ColumnRef, Expr, FromItem, JoinConstraint, NodeId, QueryNode, QueryTree, SelectItem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolveMode {
    /// Ambiguous references become unresolved sentinels.
    #[default]
    Lenient,
    /// Ambiguous references are errors.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("column `{name}` is ambiguous; candidates: {}", candidates.join(", "))]
    AmbiguousColumn { name: String, candidates: Vec<String> },
}

/// Scope information for every node of a resolved tree, indexed by node id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Resolution {
    pub scopes: Vec<Scope>,
    pub catalog_hash: String,
    pub mode: ResolveMode,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scope {
    /// FROM leaves in left-to-right order.
    pub sources: Vec<Source>,
    /// Output columns; for set operations merged positionally across arms.
    pub outputs: Vec<OutputColumn>,
    /// Columns produced by `*` and `t.*` expansion.
    pub star_columns: Vec<CanonicalColumn>,
    /// Source a wildcard could not enumerate; lookups of unknown output
    /// names fall through to it.
    open_source: Option<usize>,
    open_ambiguous: bool,
    merged: BTreeSet<String>,
    natural: bool,
    /// Column pairs equated by USING or NATURAL joins.
    pub join_links: Vec<JoinLink>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinLink {
    pub left: usize,
    pub right: usize,
    pub left_columns: Vec<CanonicalColumn>,
    pub right_columns: Vec<CanonicalColumn>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    /// Name the source is qualified by: its alias, else its table name.
    pub label: String,
    pub kind: SourceKind,
    /// Column renames from CTE column lists and alias column lists.
    pub renames: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    Table { name: String, known: bool },
    Cte { name: String, body: NodeId },
    Derived { node: NodeId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputColumn {
    pub name: Option<String>,
    pub columns: Vec<CanonicalColumn>,
    pub render: String,
}

#[derive(Debug, Clone)]
struct Hit {
    columns: Vec<CanonicalColumn>,
    render: String,
    /// False when the hit relies on a source whose columns are unknown.
    certain: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Aliases {
    Ignore,
    First,
    Last,
}

/// Resolve `tree` against `catalog`, returning an annotated copy.
pub fn resolve(tree: &QueryTree, catalog: &SchemaCatalog, mode: ResolveMode) -> Result<QueryTree, ResolveError> {
    let mut r = Resolver { catalog, mode, nodes: tree.nodes.clone(), scopes: vec![Scope::default(); tree.nodes.len()] };
    r.node(tree.root)?;
    let mut out = tree.clone();
    out.nodes = r.nodes;
    out.resolution = Some(Resolution { scopes: r.scopes, catalog_hash: catalog.source_hash().to_string(), mode });
    Ok(out)
}

impl QueryTree {
    /// Lenient resolution; see [`resolve`].
    pub fn resolved(&self, catalog: &SchemaCatalog) -> QueryTree {
        resolve(self, catalog, ResolveMode::Lenient).expect("lenient resolution does not fail")
    }

    pub(crate) fn canonical_renderer(&self) -> Renderer<'_> {
        let scopes = self.resolution.as_ref().map(|r| r.scopes.as_slice()).unwrap_or(&[]);
        Renderer::canonical(&self.nodes, scopes)
    }

    /// Canonical text of a node: aliases dropped, CTEs inlined, columns
    /// printed as base identities.
    pub fn canonical_sql(&self, id: NodeId) -> String {
        self.canonical_renderer().node(id)
    }

    pub fn canonical_expr(&self, e: &Expr) -> String {
        self.canonical_renderer().expr(e)
    }
}

struct Resolver<'c> {
    catalog: &'c SchemaCatalog,
    mode: ResolveMode,
    nodes: Vec<QueryNode>,
    scopes: Vec<Scope>,
}

impl Resolver<'_> {
    fn node(&mut self, id: NodeId) -> Result<(), ResolveError> {
        let bodies: Vec<NodeId> = self.nodes[id.0].with.iter().map(|c| c.body).collect();
        for body in bodies {
            self.node(body)?;
        }

        let mut sources = Vec::new();
        let mut merged = BTreeSet::new();
        let mut natural = false;
        let from = self.nodes[id.0].from.clone();
        for item in &from {
            collect_join_info(item, &mut merged, &mut natural);
            for leaf in item.leaves() {
                sources.push(self.source(id, leaf)?);
            }
        }
        self.scopes[id.0] = Scope { sources, merged, natural, ..Scope::default() };
        let mut links = Vec::new();
        let mut leaf = 0;
        for item in &from {
            self.join_links(id, item, &mut leaf, &mut links);
        }
        self.scopes[id.0].join_links = links;

        let expr_children: Vec<NodeId> = self.nodes[id.0]
            .children
            .iter()
            .copied()
            .filter(|c| self.nodes[c.0].parent.is_some_and(|(_, pos)| pos.is_expression()))
            .collect();
        for child in expr_children {
            self.node(child)?;
        }

        let chain = self.chain(id);
        let mut node = std::mem::replace(&mut self.nodes[id.0], QueryNode::empty(id, None));
        let result = self.bind_node(&mut node, &chain);
        self.nodes[id.0] = node;
        result?;

        let arms: Vec<NodeId> = self.nodes[id.0].set_ops.iter().map(|a| a.node).collect();
        for arm in &arms {
            self.node(*arm)?;
        }
        self.merge_arms(id, &arms);
        Ok(())
    }

    fn bind_node(&mut self, node: &mut QueryNode, chain: &[NodeId]) -> Result<(), ResolveError> {
        let id = node.id;
        if let Some(crate::frontend::Distinct::On(exprs)) = &mut node.distinct {
            for e in exprs {
                self.bind(e, chain, Aliases::Ignore)?;
            }
        }
        for item in &mut node.select {
            if let SelectItem::Expr { expr, .. } = item {
                self.bind(expr, chain, Aliases::Ignore)?;
            }
        }
        self.compute_outputs(node);

        for item in &mut node.from {
            self.bind_join(item, chain)?;
        }
        if let Some(w) = &mut node.where_pred {
            self.bind(w, chain, Aliases::Ignore)?;
        }
        for g in &mut node.group_by {
            self.bind(g, chain, Aliases::Last)?;
        }
        if let Some(h) = &mut node.having {
            self.bind(h, chain, Aliases::Last)?;
        }
        for o in &mut node.order_by {
            self.bind(&mut o.expr, chain, Aliases::First)?;
        }
        for e in node.limit.iter_mut().chain(node.offset.iter_mut()) {
            self.bind(e, chain, Aliases::Ignore)?;
        }
        debug_assert_eq!(chain[0], id);
        Ok(())
    }

    fn bind_join(&self, item: &mut FromItem, chain: &[NodeId]) -> Result<(), ResolveError> {
        if let FromItem::Join { left, right, constraint, .. } = item {
            self.bind_join(left, chain)?;
            self.bind_join(right, chain)?;
            if let JoinConstraint::On(e) = constraint {
                self.bind(e, chain, Aliases::Ignore)?;
            }
        }
        Ok(())
    }

    fn bind(&self, e: &mut Expr, chain: &[NodeId], aliases: Aliases) -> Result<(), ResolveError> {
        let mut err = None;
        e.walk_mut(&mut |x| {
            if let Expr::Column(c) = x {
                if err.is_none() {
                    match self.lookup(c, chain, aliases) {
                        Ok(b) => c.binding = Some(b),
                        Err(e) => err = Some(e),
                    }
                }
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// The node itself followed by every enclosing node whose FROM clause
    /// is visible to it.
    fn chain(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = vec![id];
        let mut cur = id;
        while let Some((p, pos)) = self.nodes[cur.0].parent {
            if pos.is_expression() {
                out.push(p);
            }
            cur = p;
        }
        out
    }

    fn visible_cte(&self, id: NodeId, name: &str) -> Option<NodeId> {
        let own = &self.nodes[id.0].with;
        if let Some(c) = own.iter().find(|c| c.name.value == name) {
            return Some(c.body);
        }
        let mut cur = id;
        while let Some((p, pos)) = self.nodes[cur.0].parent {
            let with = &self.nodes[p.0].with;
            let visible = match pos {
                crate::frontend::Position::Cte(k) => &with[..k],
                _ => &with[..],
            };
            if let Some(c) = visible.iter().rev().find(|c| c.name.value == name) {
                return Some(c.body);
            }
            cur = p;
        }
        None
    }

    fn source(&mut self, id: NodeId, leaf: &FromItem) -> Result<Source, ResolveError> {
        Ok(match leaf {
            FromItem::Table { name, alias } => {
                let table = name.last().map(|i| i.value.clone()).unwrap_or_default();
                let alias_cols: Vec<String> =
                    alias.as_ref().map(|a| a.columns.iter().map(|c| c.value.clone()).collect()).unwrap_or_default();
                let label = alias.as_ref().map(|a| a.name.value.clone()).unwrap_or_else(|| table.clone());
                let cte = (name.len() == 1).then(|| self.visible_cte(id, &table)).flatten();
                match cte {
                    Some(body) => {
                        let cte_cols = self.cte_columns(body);
                        Source {
                            label,
                            kind: SourceKind::Cte { name: table, body },
                            renames: overlay(cte_cols, alias_cols),
                        }
                    }
                    None => {
                        let known = self.catalog.table(&table).is_some();
                        Source { label, kind: SourceKind::Table { name: table, known }, renames: alias_cols }
                    }
                }
            }
            FromItem::Derived { node, alias } => {
                self.node(*node)?;
                let label = alias.as_ref().map(|a| a.name.value.clone()).unwrap_or_default();
                let renames =
                    alias.as_ref().map(|a| a.columns.iter().map(|c| c.value.clone()).collect()).unwrap_or_default();
                Source { label, kind: SourceKind::Derived { node: *node }, renames }
            }
            FromItem::Join { .. } => unreachable!("leaves never contain joins"),
        })
    }

    fn join_links(&self, id: NodeId, item: &FromItem, leaf: &mut usize, out: &mut Vec<JoinLink>) {
        let FromItem::Join { left, right, constraint, .. } = item else {
            *leaf += 1;
            return;
        };
        let start = *leaf;
        self.join_links(id, left, leaf, out);
        let mid = *leaf;
        self.join_links(id, right, leaf, out);
        let end = *leaf;
        let names: Vec<String> = match constraint {
            JoinConstraint::Using(cols) => cols.iter().map(|c| c.value.clone()).collect(),
            JoinConstraint::Natural => {
                let right_names: BTreeSet<String> = (mid..end).flat_map(|i| self.column_names(id, i)).collect();
                let mut names: Vec<String> =
                    (start..mid).flat_map(|i| self.column_names(id, i)).filter(|n| right_names.contains(n)).collect();
                names.dedup();
                names
            }
            _ => return,
        };
        for name in names {
            let find = |range: std::ops::Range<usize>| {
                range.into_iter().find_map(|i| self.source_lookup(id, i, &name).map(|h| (i, h.columns)))
            };
            if let (Some((l, lc)), Some((r, rc))) = (find(start..mid), find(mid..end)) {
                out.push(JoinLink { left: l, right: r, left_columns: lc, right_columns: rc });
            }
        }
    }

    /// Column names a source exposes, when they are enumerable.
    fn column_names(&self, scope: NodeId, idx: usize) -> Vec<String> {
        let source = &self.scopes[scope.0].sources[idx];
        let base: Vec<Option<String>> = match &source.kind {
            SourceKind::Table { name, known: true } => self
                .catalog
                .table(name)
                .map(|t| t.column_names().map(|c| Some(c.to_string())).collect())
                .unwrap_or_default(),
            SourceKind::Table { known: false, .. } => Vec::new(),
            SourceKind::Cte { body, .. } | SourceKind::Derived { node: body } => {
                self.scopes[body.0].outputs.iter().map(|o| o.name.clone()).collect()
            }
        };
        base.into_iter().enumerate().filter_map(|(i, n)| source.renames.get(i).cloned().or(n)).collect()
    }

    fn cte_columns(&self, body: NodeId) -> Vec<String> {
        let Some((p, crate::frontend::Position::Cte(k))) = self.nodes[body.0].parent else {
            return Vec::new();
        };
        self.nodes[p.0].with[k].columns.iter().map(|c| c.value.clone()).collect()
    }

    fn lookup(&self, c: &ColumnRef, chain: &[NodeId], aliases: Aliases) -> Result<Binding, ResolveError> {
        let here = chain[0];
        let name = c.name.value.as_str();
        if let Some(q) = c.qualifier.last() {
            for &scope in chain {
                let found = self.scopes[scope.0].sources.iter().position(|s| s.label == q.value);
                if let Some(idx) = found {
                    let source = &self.scopes[scope.0].sources[idx];
                    return Ok(match self.source_lookup(scope, idx, name) {
                        Some(hit) => bind_hit(hit, Some(scope), Some(idx)),
                        None => match &source.kind {
                            SourceKind::Table { name: t, .. } => Binding {
                                columns: vec![CanonicalColumn::unresolved(t.clone(), name)],
                                render: format!("{t}.{name}"),
                                scope: Some(scope),
                                source: Some(idx),
                            },
                            _ => sentinel(here, name),
                        },
                    });
                }
            }
            return Ok(sentinel(here, name));
        }

        if aliases == Aliases::First {
            if let Some(b) = self.alias_lookup(here, name) {
                return Ok(b);
            }
        }
        for &scope in chain {
            let sources = &self.scopes[scope.0].sources;
            let hits: Vec<(usize, Hit)> =
                (0..sources.len()).filter_map(|i| self.source_lookup(scope, i, name).map(|h| (i, h))).collect();
            let certain: Vec<&(usize, Hit)> = hits.iter().filter(|(_, h)| h.certain).collect();
            let chosen = match certain.as_slice() {
                [one] => Some(*one),
                [first, ..] => {
                    let s = &self.scopes[scope.0];
                    if s.natural || s.merged.contains(name) {
                        Some(*first)
                    } else if self.mode == ResolveMode::Strict {
                        let mut candidates: Vec<String> =
                            certain.iter().map(|(i, _)| format!("{}.{name}", sources[*i].label)).collect();
                        candidates.sort();
                        return Err(ResolveError::AmbiguousColumn { name: name.to_string(), candidates });
                    } else {
                        return Ok(sentinel(here, name));
                    }
                }
                [] => match hits.as_slice() {
                    [one] => Some(one),
                    [] => None,
                    _ => return Ok(sentinel(here, name)),
                },
            };
            if let Some((idx, hit)) = chosen {
                return Ok(bind_hit(hit.clone(), Some(scope), Some(*idx)));
            }
        }
        if aliases == Aliases::Last {
            if let Some(b) = self.alias_lookup(here, name) {
                return Ok(b);
            }
        }
        Ok(sentinel(here, name))
    }

    fn alias_lookup(&self, id: NodeId, name: &str) -> Option<Binding> {
        let out = self.scopes[id.0].outputs.iter().find(|o| o.name.as_deref() == Some(name))?;
        Some(Binding { columns: out.columns.clone(), render: out.render.clone(), scope: Some(id), source: None })
    }

    fn source_lookup(&self, scope: NodeId, idx: usize, name: &str) -> Option<Hit> {
        let source = &self.scopes[scope.0].sources[idx];
        match &source.kind {
            SourceKind::Table { name: t, known: true } => {
                let table = self.catalog.table(t)?;
                let column = match source.renames.iter().position(|r| r == name) {
                    Some(pos) => table.columns.get(pos)?.name.as_str(),
                    None => {
                        let pos = table.columns.iter().position(|c| c.name == name)?;
                        if pos < source.renames.len() {
                            return None;
                        }
                        name
                    }
                };
                Some(Hit {
                    columns: vec![CanonicalColumn::resolved(t.clone(), column)],
                    render: format!("{t}.{column}"),
                    certain: true,
                })
            }
            SourceKind::Table { name: t, known: false } => Some(Hit {
                columns: vec![CanonicalColumn::unresolved(t.clone(), name)],
                render: format!("{t}.{name}"),
                certain: false,
            }),
            SourceKind::Cte { body, .. } | SourceKind::Derived { node: body } => {
                self.output_lookup(*body, name, &source.renames)
            }
        }
    }

    fn output_lookup(&self, node: NodeId, name: &str, renames: &[String]) -> Option<Hit> {
        let scope = &self.scopes[node.0];
        let named = scope.outputs.iter().enumerate().find(|(i, o)| match renames.get(*i) {
            Some(r) => r == name,
            None => o.name.as_deref() == Some(name),
        });
        if let Some((_, o)) = named {
            return Some(Hit { columns: o.columns.clone(), render: o.render.clone(), certain: true });
        }
        if renames.iter().any(|r| r == name) {
            return None;
        }
        let open = scope.open_source?;
        self.source_lookup(node, open, name).map(|mut h| {
            h.certain = false;
            h
        })
    }

    fn compute_outputs(&mut self, node: &QueryNode) {
        let id = node.id;
        let mut outputs = Vec::new();
        let mut stars = Vec::new();
        let mut open: Vec<usize> = Vec::new();
        let renderer = Renderer::canonical(&self.nodes, &self.scopes);
        for item in &node.select {
            match item {
                SelectItem::Expr { expr, alias } => {
                    let mut columns = BTreeSet::new();
                    expr.walk(&mut |e| {
                        if let Expr::Column(ColumnRef { binding: Some(b), .. }) = e {
                            columns.extend(b.columns.iter().cloned());
                        }
                    });
                    let name = alias.as_ref().map(|a| a.value.clone()).or_else(|| output_name(expr));
                    outputs.push(OutputColumn {
                        name,
                        columns: columns.into_iter().collect(),
                        render: renderer.expr(expr),
                    });
                }
                SelectItem::Wildcard => {
                    for i in 0..self.scopes[id.0].sources.len() {
                        self.expand(id, i, &mut outputs, &mut stars, &mut open);
                    }
                }
                SelectItem::QualifiedWildcard(parts) => {
                    let label = parts.last().map(|p| p.value.as_str()).unwrap_or_default();
                    if let Some(i) = self.scopes[id.0].sources.iter().position(|s| s.label == label) {
                        self.expand(id, i, &mut outputs, &mut stars, &mut open);
                    }
                }
            }
        }
        open.dedup();
        let scope = &mut self.scopes[id.0];
        scope.outputs = outputs;
        scope.star_columns = stars;
        scope.open_source = (open.len() == 1).then(|| open[0]);
        scope.open_ambiguous = open.len() > 1;
    }

    fn expand(
        &self,
        id: NodeId,
        idx: usize,
        outputs: &mut Vec<OutputColumn>,
        stars: &mut Vec<CanonicalColumn>,
        open: &mut Vec<usize>,
    ) {
        let source = &self.scopes[id.0].sources[idx];
        match &source.kind {
            SourceKind::Table { name: t, known: true } => {
                let table = self.catalog.table(t).expect("known table");
                for (pos, col) in table.columns.iter().enumerate() {
                    let canon = CanonicalColumn::resolved(t.clone(), col.name.clone());
                    let name = source.renames.get(pos).cloned().unwrap_or_else(|| col.name.clone());
                    outputs.push(OutputColumn {
                        name: Some(name),
                        columns: vec![canon.clone()],
                        render: canon.to_string(),
                    });
                    stars.push(canon);
                }
            }
            SourceKind::Table { name: t, known: false } => {
                stars.push(CanonicalColumn::unresolved(t.clone(), "*"));
                open.push(idx);
            }
            SourceKind::Cte { body, .. } | SourceKind::Derived { node: body } => {
                let inner = &self.scopes[body.0];
                for (pos, o) in inner.outputs.iter().enumerate() {
                    let name = source.renames.get(pos).cloned().or_else(|| o.name.clone());
                    outputs.push(OutputColumn { name, columns: o.columns.clone(), render: o.render.clone() });
                    stars.extend(o.columns.iter().cloned());
                }
                if inner.open_source.is_some() || inner.open_ambiguous {
                    stars.extend(inner.star_columns.iter().filter(|c| c.column == "*").cloned());
                    open.push(idx);
                }
            }
        }
    }

    fn merge_arms(&mut self, id: NodeId, arms: &[NodeId]) {
        if arms.is_empty() {
            return;
        }
        let mut outputs = self.scopes[id.0].outputs.clone();
        for (pos, out) in outputs.iter_mut().enumerate() {
            let mut columns: BTreeSet<CanonicalColumn> = out.columns.iter().cloned().collect();
            let mut renders = vec![out.render.clone()];
            for arm in arms {
                if let Some(o) = self.scopes[arm.0].outputs.get(pos) {
                    columns.extend(o.columns.iter().cloned());
                    renders.push(o.render.clone());
                }
            }
            out.columns = columns.into_iter().collect();
            renders.dedup();
            if renders.len() > 1 {
                out.render = format!("{{{}}}", renders.join(" | "));
            }
        }
        self.scopes[id.0].outputs = outputs;
    }
}

fn overlay(mut base: Vec<String>, top: Vec<String>) -> Vec<String> {
    for (i, name) in top.into_iter().enumerate() {
        if i < base.len() {
            base[i] = name;
        } else {
            base.push(name);
        }
    }
    base
}

fn collect_join_info(item: &FromItem, merged: &mut BTreeSet<String>, natural: &mut bool) {
    if let FromItem::Join { left, right, constraint, .. } = item {
        collect_join_info(left, merged, natural);
        collect_join_info(right, merged, natural);
        match constraint {
            JoinConstraint::Using(cols) => merged.extend(cols.iter().map(|c| c.value.clone())),
            JoinConstraint::Natural => *natural = true,
            _ => {}
        }
    }
}

fn bind_hit(hit: Hit, scope: Option<NodeId>, source: Option<usize>) -> Binding {
    Binding { columns: hit.columns, render: hit.render, scope, source }
}

/// Placeholder table for a column whose owner cannot be determined.
pub fn sentinel_table(node: NodeId) -> String {
    format!("?{node}")
}

fn sentinel(node: NodeId, name: &str) -> Binding {
    let table = sentinel_table(node);
    Binding {
        render: format!("{table}.{name}"),
        columns: vec![CanonicalColumn::unresolved(table, name)],
        scope: None,
        source: None,
    }
}

fn output_name(e: &Expr) -> Option<String> {
    match e {
        Expr::Column(c) => Some(c.name.value.clone()),
        Expr::Function(f) => Some(f.name.rsplit('.').next().unwrap_or_default().to_lowercase()),
        Expr::Cast { expr, .. } | Expr::Nested(expr) => output_name(expr),
        _ => None,
    }
}
