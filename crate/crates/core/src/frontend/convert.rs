//! Lowering of the sqlparser AST into the owned [`QueryTree`] arena.

use sqlparser::ast as sp;
use sqlparser::ast::Spanned;

use super::ast::*;
use super::error::{LineIndex, ParseError};

type Result<T> = std::result::Result<T, ParseError>;

pub(crate) struct Lowering<'a> {
    index: &'a LineIndex<'a>,
    nodes: Vec<QueryNode>,
}

impl<'a> Lowering<'a> {
    pub fn new(index: &'a LineIndex<'a>) -> Self {
        Lowering { index, nodes: Vec::new() }
    }

    pub fn finish(self) -> Vec<QueryNode> {
        self.nodes
    }

    fn unsupported<T>(&self, name: impl Into<String>, span: sqlparser::tokenizer::Span) -> Result<T> {
        Err(ParseError::UnsupportedConstruct { name: name.into(), offset: self.index.offset(span.start) })
    }

    fn alloc(&mut self, parent: Option<(NodeId, Position)>) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(QueryNode::empty(id, parent));
        if let Some((p, _)) = parent {
            self.nodes[p.0].children.push(id);
        }
        id
    }

    pub fn query(&mut self, q: &sp::Query, parent: Option<(NodeId, Position)>) -> Result<NodeId> {
        self.reject_query_extras(q)?;

        let (leading, arms) = self.leading_chain(&q.body)?;
        let id = self.alloc(parent);

        if let Some(with) = &q.with {
            if with.recursive {
                return self.unsupported("WITH RECURSIVE", with.span());
            }
            for (k, cte) in with.cte_tables.iter().enumerate() {
                if cte.from.is_some() {
                    return self.unsupported("CTE FROM", cte.span());
                }
                let body = self.query(&cte.query, Some((id, Position::Cte(k))))?;
                let name = ident(&cte.alias.name);
                if self.nodes[id.0].with.iter().any(|c| c.name == name) {
                    return self.unsupported(format!("duplicate CTE name {name}"), cte.alias.name.span);
                }
                let columns = cte.alias.columns.iter().map(|c| ident(&c.name)).collect();
                self.nodes[id.0].with.push(CteDef { name, columns, body });
            }
        }

        match leading {
            sp::SetExpr::Select(select) => self.select_core(id, select)?,
            other => return self.unsupported(set_expr_name(other), other.span()),
        }

        for (k, (op, quantifier, operand)) in arms.into_iter().enumerate() {
            let op = set_operator(op);
            let all = match quantifier {
                sp::SetQuantifier::All => true,
                sp::SetQuantifier::Distinct | sp::SetQuantifier::None => false,
                other => return self.unsupported(format!("set quantifier {other}"), operand.span()),
            };
            let node = self.set_operand(operand, (id, Position::SetArm(k)))?;
            self.nodes[id.0].set_ops.push(SetOpArm { op, all, node });
        }

        if let Some(order_by) = &q.order_by {
            if order_by.interpolate.is_some() {
                return self.unsupported("ORDER BY INTERPOLATE", q.span());
            }
            let items = match &order_by.kind {
                sp::OrderByKind::Expressions(items) => items,
                sp::OrderByKind::All(_) => return self.unsupported("ORDER BY ALL", q.span()),
            };
            let items = self.order_items(items, (id, Position::OrderBy))?;
            self.nodes[id.0].order_by = items;
        }

        if let Some(limit) = &q.limit_clause {
            let (limit, offset) = match limit {
                sp::LimitClause::LimitOffset { limit, offset, limit_by } => {
                    if !limit_by.is_empty() {
                        return self.unsupported("LIMIT BY", q.span());
                    }
                    (limit.as_ref(), offset.as_ref().map(|o| &o.value))
                }
                sp::LimitClause::OffsetCommaLimit { offset, limit } => (Some(limit), Some(offset)),
            };
            let ctx = (id, Position::Limit);
            let limit = limit.map(|e| self.expr(e, ctx)).transpose()?;
            let offset = offset.map(|e| self.expr(e, ctx)).transpose()?;
            let node = &mut self.nodes[id.0];
            node.limit = limit;
            node.offset = offset;
        }
        Ok(id)
    }

    fn reject_query_extras(&self, q: &sp::Query) -> Result<()> {
        if q.fetch.is_some() {
            return self.unsupported("FETCH", q.span());
        }
        if !q.locks.is_empty() {
            return self.unsupported("FOR UPDATE/SHARE", q.span());
        }
        if q.for_clause.is_some() {
            return self.unsupported("FOR clause", q.span());
        }
        if q.settings.is_some() {
            return self.unsupported("SETTINGS", q.span());
        }
        if q.format_clause.is_some() {
            return self.unsupported("FORMAT", q.span());
        }
        if !q.pipe_operators.is_empty() {
            return self.unsupported("pipe operator", q.span());
        }
        Ok(())
    }

    /// Flatten a set-operation chain whose leading operand may itself be a
    /// parenthesized chain. Parenthesized leading operands may not carry
    /// WITH/ORDER BY/LIMIT, and flattening must not change precedence.
    fn leading_chain<'q>(&self, body: &'q sp::SetExpr) -> Result<(&'q sp::SetExpr, Vec<Arm<'q>>)> {
        let (lead, arms) = flatten_set_expr(body);
        match lead {
            sp::SetExpr::Query(inner) => {
                if inner.with.is_some() || inner.order_by.is_some() || inner.limit_clause.is_some() {
                    return self.unsupported("clauses inside leading set operand", inner.span());
                }
                self.reject_query_extras(inner)?;
                let (inner_lead, mut inner_arms) = self.leading_chain(&inner.body)?;
                let outer_intersect = arms.iter().any(|(op, _, _)| matches!(op, sp::SetOperator::Intersect));
                let inner_loose = inner_arms.iter().any(|(op, _, _)| !matches!(op, sp::SetOperator::Intersect));
                if outer_intersect && inner_loose {
                    return self.unsupported("parenthesized set operation under INTERSECT", inner.span());
                }
                inner_arms.extend(arms);
                Ok((inner_lead, inner_arms))
            }
            other => Ok((other, arms)),
        }
    }

    fn set_operand(&mut self, operand: &sp::SetExpr, parent: (NodeId, Position)) -> Result<NodeId> {
        match operand {
            sp::SetExpr::Query(q) => self.query(q, Some(parent)),
            sp::SetExpr::Select(_) | sp::SetExpr::SetOperation { .. } => {
                let (leading, arms) = self.leading_chain(operand)?;
                let id = self.alloc(Some(parent));
                match leading {
                    sp::SetExpr::Select(select) => self.select_core(id, select)?,
                    other => return self.unsupported(set_expr_name(other), other.span()),
                }
                for (k, (op, quantifier, arm)) in arms.into_iter().enumerate() {
                    let op = set_operator(op);
                    let all = matches!(quantifier, sp::SetQuantifier::All);
                    let node = self.set_operand(arm, (id, Position::SetArm(k)))?;
                    self.nodes[id.0].set_ops.push(SetOpArm { op, all, node });
                }
                Ok(id)
            }
            other => self.unsupported(set_expr_name(other), other.span()),
        }
    }

    fn select_core(&mut self, id: NodeId, s: &sp::Select) -> Result<()> {
        let span = s.span();
        if s.top.is_some() {
            return self.unsupported("TOP", span);
        }
        if s.exclude.is_some() {
            return self.unsupported("EXCLUDE", span);
        }
        if s.into.is_some() {
            return self.unsupported("SELECT INTO", span);
        }
        if !s.lateral_views.is_empty() {
            return self.unsupported("LATERAL VIEW", span);
        }
        if s.prewhere.is_some() {
            return self.unsupported("PREWHERE", span);
        }
        if !s.cluster_by.is_empty() || !s.distribute_by.is_empty() || !s.sort_by.is_empty() {
            return self.unsupported("CLUSTER/DISTRIBUTE/SORT BY", span);
        }
        if !s.named_window.is_empty() {
            return self.unsupported("WINDOW clause", span);
        }
        if s.qualify.is_some() {
            return self.unsupported("QUALIFY", span);
        }
        if s.value_table_mode.is_some() {
            return self.unsupported("SELECT AS VALUE/STRUCT", span);
        }
        if s.connect_by.is_some() {
            return self.unsupported("CONNECT BY", span);
        }
        if !matches!(s.flavor, sp::SelectFlavor::Standard) {
            return self.unsupported("FROM-first SELECT", span);
        }

        let select_ctx = (id, Position::Select);
        let distinct = match &s.distinct {
            None => None,
            Some(sp::Distinct::Distinct) => Some(Distinct::All),
            Some(sp::Distinct::On(exprs)) => Some(Distinct::On(self.exprs(exprs, select_ctx)?)),
        };

        let mut select = Vec::with_capacity(s.projection.len());
        for item in &s.projection {
            select.push(match item {
                sp::SelectItem::UnnamedExpr(e) => SelectItem::Expr { expr: self.expr(e, select_ctx)?, alias: None },
                sp::SelectItem::ExprWithAlias { expr, alias } => {
                    SelectItem::Expr { expr: self.expr(expr, select_ctx)?, alias: Some(ident(alias)) }
                }
                sp::SelectItem::Wildcard(opts) => {
                    self.plain_wildcard(opts, item.span())?;
                    SelectItem::Wildcard
                }
                sp::SelectItem::QualifiedWildcard(kind, opts) => {
                    self.plain_wildcard(opts, item.span())?;
                    match kind {
                        sp::SelectItemQualifiedWildcardKind::ObjectName(name) => {
                            SelectItem::QualifiedWildcard(self.object_name(name)?)
                        }
                        sp::SelectItemQualifiedWildcardKind::Expr(e) => {
                            return self.unsupported("expression wildcard", e.span())
                        }
                    }
                }
            });
        }

        let mut from = Vec::with_capacity(s.from.len());
        for twj in &s.from {
            from.push(self.table_with_joins(twj, id)?);
        }

        let where_pred = s.selection.as_ref().map(|e| self.expr(e, (id, Position::Where))).transpose()?;

        let group_by = match &s.group_by {
            sp::GroupByExpr::Expressions(exprs, modifiers) => {
                if !modifiers.is_empty() {
                    return self.unsupported("GROUP BY modifier", span);
                }
                self.exprs(exprs, (id, Position::GroupBy))?
            }
            sp::GroupByExpr::All(_) => return self.unsupported("GROUP BY ALL", span),
        };

        let having = s.having.as_ref().map(|e| self.expr(e, (id, Position::Having))).transpose()?;

        let node = &mut self.nodes[id.0];
        node.distinct = distinct;
        node.select = select;
        node.from = from;
        node.where_pred = where_pred;
        node.group_by = group_by;
        node.having = having;
        Ok(())
    }

    fn plain_wildcard(&self, opts: &sp::WildcardAdditionalOptions, span: sqlparser::tokenizer::Span) -> Result<()> {
        if opts.opt_ilike.is_some()
            || opts.opt_exclude.is_some()
            || opts.opt_except.is_some()
            || opts.opt_replace.is_some()
            || opts.opt_rename.is_some()
        {
            return self.unsupported("wildcard options", span);
        }
        Ok(())
    }

    fn object_name(&self, name: &sp::ObjectName) -> Result<Vec<Ident>> {
        name.0
            .iter()
            .map(|part| match part {
                sp::ObjectNamePart::Identifier(i) => Ok(ident(i)),
                sp::ObjectNamePart::Function(f) => self.unsupported("function in object name", f.name.span),
            })
            .collect()
    }

    fn table_with_joins(&mut self, twj: &sp::TableWithJoins, id: NodeId) -> Result<FromItem> {
        let mut item = self.table_factor(&twj.relation, id)?;
        for join in &twj.joins {
            if join.global {
                return self.unsupported("GLOBAL JOIN", join.span());
            }
            let right = self.table_factor(&join.relation, id)?;
            let (kind, constraint) = match &join.join_operator {
                sp::JoinOperator::Join(c) | sp::JoinOperator::Inner(c) => (JoinKind::Inner, c),
                sp::JoinOperator::Left(c) | sp::JoinOperator::LeftOuter(c) => (JoinKind::Left, c),
                sp::JoinOperator::Right(c) | sp::JoinOperator::RightOuter(c) => (JoinKind::Right, c),
                sp::JoinOperator::FullOuter(c) => (JoinKind::Full, c),
                sp::JoinOperator::CrossJoin(c) => (JoinKind::Cross, c),
                _ => return self.unsupported("join operator", join.span()),
            };
            let constraint = match constraint {
                sp::JoinConstraint::On(e) => JoinConstraint::On(self.expr(e, (id, Position::JoinOn))?),
                sp::JoinConstraint::Using(names) => JoinConstraint::Using(
                    names
                        .iter()
                        .map(|n| self.object_name(n).map(|mut parts| parts.pop().unwrap_or_else(|| Ident::new(""))))
                        .collect::<Result<_>>()?,
                ),
                sp::JoinConstraint::Natural => JoinConstraint::Natural,
                sp::JoinConstraint::None => JoinConstraint::None,
            };
            item = FromItem::Join { left: Box::new(item), right: Box::new(right), kind, constraint };
        }
        Ok(item)
    }

    fn table_factor(&mut self, tf: &sp::TableFactor, id: NodeId) -> Result<FromItem> {
        match tf {
            sp::TableFactor::Table {
                name,
                alias,
                args,
                with_hints,
                version,
                with_ordinality,
                partitions,
                json_path,
                sample,
                index_hints,
            } => {
                if args.is_some() {
                    return self.unsupported("table function", tf.span());
                }
                if !with_hints.is_empty()
                    || version.is_some()
                    || *with_ordinality
                    || !partitions.is_empty()
                    || json_path.is_some()
                    || sample.is_some()
                    || !index_hints.is_empty()
                {
                    return self.unsupported("table modifiers", tf.span());
                }
                Ok(FromItem::Table { name: self.object_name(name)?, alias: self.table_alias(alias.as_ref())? })
            }
            sp::TableFactor::Derived { lateral, subquery, alias } => {
                if *lateral {
                    return self.unsupported("LATERAL", tf.span());
                }
                let node = self.query(subquery, Some((id, Position::From)))?;
                Ok(FromItem::Derived { node, alias: self.table_alias(alias.as_ref())? })
            }
            sp::TableFactor::NestedJoin { table_with_joins, alias } => {
                if alias.is_some() {
                    return self.unsupported("aliased parenthesized join", tf.span());
                }
                self.table_with_joins(table_with_joins, id)
            }
            other => self.unsupported(table_factor_name(other), other.span()),
        }
    }

    fn table_alias(&self, alias: Option<&sp::TableAlias>) -> Result<Option<TableAlias>> {
        let Some(alias) = alias else { return Ok(None) };
        if alias.columns.iter().any(|c| c.data_type.is_some()) {
            return self.unsupported("typed alias columns", alias.name.span);
        }
        Ok(Some(TableAlias {
            name: ident(&alias.name),
            columns: alias.columns.iter().map(|c| ident(&c.name)).collect(),
        }))
    }

    fn order_items(&mut self, items: &[sp::OrderByExpr], ctx: (NodeId, Position)) -> Result<Vec<OrderItem>> {
        items
            .iter()
            .map(|o| {
                if o.with_fill.is_some() {
                    return self.unsupported("WITH FILL", o.span());
                }
                Ok(OrderItem { expr: self.expr(&o.expr, ctx)?, asc: o.options.asc, nulls_first: o.options.nulls_first })
            })
            .collect()
    }

    fn exprs(&mut self, exprs: &[sp::Expr], ctx: (NodeId, Position)) -> Result<Vec<Expr>> {
        exprs.iter().map(|e| self.expr(e, ctx)).collect()
    }

    fn boxed(&mut self, e: &sp::Expr, ctx: (NodeId, Position)) -> Result<Box<Expr>> {
        self.expr(e, ctx).map(Box::new)
    }

    pub fn expr(&mut self, e: &sp::Expr, ctx: (NodeId, Position)) -> Result<Expr> {
        use sp::Expr as E;
        Ok(match e {
            E::Identifier(i) => Expr::Column(ColumnRef { qualifier: Vec::new(), name: ident(i), binding: None }),
            E::CompoundIdentifier(parts) => {
                let mut parts: Vec<Ident> = parts.iter().map(ident).collect();
                let name = parts.pop().unwrap_or_else(|| Ident::new(""));
                Expr::Column(ColumnRef { qualifier: parts, name, binding: None })
            }
            E::Value(v) => Expr::Literal(self.literal(&v.value, e)?),
            E::TypedString(ts) => {
                let value = match &ts.value.value {
                    sp::Value::SingleQuotedString(s) => s.clone(),
                    _ => return self.unsupported("typed literal", e.span()),
                };
                Expr::Literal(Literal::Typed { data_type: ts.data_type.to_string().to_uppercase(), value })
            }
            E::Interval(iv) => {
                if iv.leading_precision.is_some()
                    || iv.last_field.is_some()
                    || iv.fractional_seconds_precision.is_some()
                {
                    return self.unsupported("INTERVAL qualifier", e.span());
                }
                Expr::Interval {
                    value: self.boxed(&iv.value, ctx)?,
                    unit: iv.leading_field.as_ref().map(|f| f.to_string().to_uppercase()),
                }
            }
            E::IsNull(x) => Expr::IsNull { expr: self.boxed(x, ctx)?, negated: false },
            E::IsNotNull(x) => Expr::IsNull { expr: self.boxed(x, ctx)?, negated: true },
            E::IsTrue(x) => Expr::IsBool { expr: self.boxed(x, ctx)?, value: true, negated: false },
            E::IsNotTrue(x) => Expr::IsBool { expr: self.boxed(x, ctx)?, value: true, negated: true },
            E::IsFalse(x) => Expr::IsBool { expr: self.boxed(x, ctx)?, value: false, negated: false },
            E::IsNotFalse(x) => Expr::IsBool { expr: self.boxed(x, ctx)?, value: false, negated: true },
            E::IsDistinctFrom(a, b) => {
                Expr::IsDistinctFrom { left: self.boxed(a, ctx)?, right: self.boxed(b, ctx)?, negated: false }
            }
            E::IsNotDistinctFrom(a, b) => {
                Expr::IsDistinctFrom { left: self.boxed(a, ctx)?, right: self.boxed(b, ctx)?, negated: true }
            }
            E::InList { expr, list, negated } => {
                Expr::InList { expr: self.boxed(expr, ctx)?, list: self.exprs(list, ctx)?, negated: *negated }
            }
            E::InSubquery { expr, subquery, negated } => {
                let expr = self.boxed(expr, ctx)?;
                let query = self.query(subquery, Some(ctx))?;
                Expr::InSubquery { expr, query, negated: *negated }
            }
            E::Between { expr, negated, low, high } => Expr::Between {
                expr: self.boxed(expr, ctx)?,
                low: self.boxed(low, ctx)?,
                high: self.boxed(high, ctx)?,
                negated: *negated,
            },
            E::BinaryOp { left, op, right } => {
                let left = self.boxed(left, ctx)?;
                let right = self.boxed(right, ctx)?;
                Expr::Binary { left, op: binary_op(op), right }
            }
            E::Like { negated, any, expr, pattern, escape_char }
            | E::ILike { negated, any, expr, pattern, escape_char } => {
                if *any {
                    return self.unsupported("LIKE ANY", e.span());
                }
                Expr::Like {
                    expr: self.boxed(expr, ctx)?,
                    pattern: self.boxed(pattern, ctx)?,
                    negated: *negated,
                    case_insensitive: matches!(e, E::ILike { .. }),
                    escape: escape_char.as_ref().map(value_text),
                }
            }
            E::AnyOp { left, compare_op, right, .. } => Expr::Quantified {
                left: self.boxed(left, ctx)?,
                op: binary_op(compare_op),
                quantifier: Quantifier::Any,
                right: self.boxed(right, ctx)?,
            },
            E::AllOp { left, compare_op, right } => Expr::Quantified {
                left: self.boxed(left, ctx)?,
                op: binary_op(compare_op),
                quantifier: Quantifier::All,
                right: self.boxed(right, ctx)?,
            },
            E::UnaryOp { op, expr } => {
                let op = match op {
                    sp::UnaryOperator::Not => UnaryOp::Not,
                    sp::UnaryOperator::Minus => UnaryOp::Minus,
                    sp::UnaryOperator::Plus => UnaryOp::Plus,
                    sp::UnaryOperator::PGPostfixFactorial => {
                        return self.unsupported("postfix operator", e.span());
                    }
                    other => UnaryOp::Other(other.to_string()),
                };
                Expr::Unary { op, expr: self.boxed(expr, ctx)? }
            }
            E::Cast { kind, expr, data_type, format } => {
                if format.is_some() {
                    return self.unsupported("CAST FORMAT", e.span());
                }
                if matches!(kind, sp::CastKind::TryCast | sp::CastKind::SafeCast) {
                    return self.unsupported("TRY_CAST", e.span());
                }
                Expr::Cast { expr: self.boxed(expr, ctx)?, data_type: data_type.to_string().to_uppercase() }
            }
            E::Extract { field, expr, .. } => Expr::Function(FunctionCall {
                name: "EXTRACT".into(),
                args: vec![self.expr(expr, ctx)?],
                style: CallStyle::Extract(field.to_string().to_uppercase()),
                ..plain_call()
            }),
            E::Ceil { expr, field } | E::Floor { expr, field } => {
                if !matches!(field, sp::CeilFloorKind::DateTimeField(sp::DateTimeField::NoDateTime)) {
                    return self.unsupported("CEIL/FLOOR TO", e.span());
                }
                let name = if matches!(e, E::Ceil { .. }) { "CEIL" } else { "FLOOR" };
                Expr::Function(FunctionCall { name: name.into(), args: vec![self.expr(expr, ctx)?], ..plain_call() })
            }
            E::Position { expr, r#in } => Expr::Function(FunctionCall {
                name: "POSITION".into(),
                args: vec![self.expr(expr, ctx)?, self.expr(r#in, ctx)?],
                style: CallStyle::Position,
                ..plain_call()
            }),
            E::Substring { expr, substring_from, substring_for, special, shorthand } => {
                if *shorthand {
                    return self.unsupported("SUBSTR shorthand", e.span());
                }
                let mut args = vec![self.expr(expr, ctx)?];
                if let Some(from) = substring_from {
                    args.push(self.expr(from, ctx)?);
                }
                if let Some(len) = substring_for {
                    args.push(self.expr(len, ctx)?);
                }
                let style = if *special {
                    CallStyle::Plain
                } else {
                    CallStyle::SubstringFromFor { has_from: substring_from.is_some(), has_for: substring_for.is_some() }
                };
                Expr::Function(FunctionCall { name: "SUBSTRING".into(), args, style, ..plain_call() })
            }
            E::Trim { expr, trim_where, trim_what, trim_characters } => {
                if trim_characters.is_some() {
                    return self.unsupported("TRIM characters list", e.span());
                }
                let mut args = vec![self.expr(expr, ctx)?];
                if let Some(what) = trim_what {
                    args.push(self.expr(what, ctx)?);
                }
                let style = if trim_where.is_none() && trim_what.is_none() {
                    CallStyle::Plain
                } else {
                    CallStyle::Trim { trim_where: trim_where.as_ref().map(|w| w.to_string().to_uppercase()) }
                };
                Expr::Function(FunctionCall { name: "TRIM".into(), args, style, ..plain_call() })
            }
            E::Nested(inner) => Expr::Nested(self.boxed(inner, ctx)?),
            E::Function(f) => Expr::Function(self.function(f, ctx)?),
            E::Case { operand, conditions, else_result, .. } => Expr::Case {
                operand: operand.as_ref().map(|o| self.boxed(o, ctx)).transpose()?,
                branches: conditions
                    .iter()
                    .map(|w| Ok((self.expr(&w.condition, ctx)?, self.expr(&w.result, ctx)?)))
                    .collect::<Result<_>>()?,
                else_result: else_result.as_ref().map(|x| self.boxed(x, ctx)).transpose()?,
            },
            E::Exists { subquery, negated } => {
                Expr::Exists { query: self.query(subquery, Some(ctx))?, negated: *negated }
            }
            E::Subquery(q) => Expr::Subquery(self.query(q, Some(ctx))?),
            E::GroupingSets(sets) => Expr::Grouping(GroupingSet::Sets(self.expr_lists(sets, ctx)?)),
            E::Cube(sets) => Expr::Grouping(GroupingSet::Cube(self.expr_lists(sets, ctx)?)),
            E::Rollup(sets) => Expr::Grouping(GroupingSet::Rollup(self.expr_lists(sets, ctx)?)),
            E::Tuple(items) => Expr::Tuple(self.exprs(items, ctx)?),
            E::Wildcard(_) => Expr::Wildcard,
            other => return self.unsupported(expr_name(other), other.span()),
        })
    }

    fn expr_lists(&mut self, lists: &[Vec<sp::Expr>], ctx: (NodeId, Position)) -> Result<Vec<Vec<Expr>>> {
        lists.iter().map(|l| self.exprs(l, ctx)).collect()
    }

    fn literal(&self, v: &sp::Value, at: &sp::Expr) -> Result<Literal> {
        Ok(match v {
            sp::Value::Number(n, long) => {
                if *long {
                    return self.unsupported("long numeric suffix", at.span());
                }
                Literal::Number(n.to_string())
            }
            sp::Value::SingleQuotedString(s) => Literal::String(s.clone()),
            sp::Value::DoubleQuotedString(s) => Literal::String(s.clone()),
            sp::Value::Boolean(b) => Literal::Boolean(*b),
            sp::Value::Null => Literal::Null,
            sp::Value::Placeholder(p) => Literal::Placeholder(p.clone()),
            _ => return self.unsupported("string literal form", at.span()),
        })
    }

    fn function(&mut self, f: &sp::Function, ctx: (NodeId, Position)) -> Result<FunctionCall> {
        let span = f.span();
        if f.uses_odbc_syntax {
            return self.unsupported("ODBC function syntax", span);
        }
        if !matches!(f.parameters, sp::FunctionArguments::None) {
            return self.unsupported("parametric function", span);
        }
        if f.null_treatment.is_some() {
            return self.unsupported("IGNORE/RESPECT NULLS", span);
        }
        if !f.within_group.is_empty() {
            return self.unsupported("WITHIN GROUP", span);
        }
        let name = self
            .object_name(&f.name)?
            .iter()
            .map(|i| if i.quoted { i.value.clone() } else { i.value.to_uppercase() })
            .collect::<Vec<_>>()
            .join(".");

        let mut call = FunctionCall { name, ..plain_call() };
        match &f.args {
            sp::FunctionArguments::None => call.has_parens = false,
            sp::FunctionArguments::Subquery(_) => return self.unsupported("function over subquery", span),
            sp::FunctionArguments::List(list) => {
                call.distinct = matches!(list.duplicate_treatment, Some(sp::DuplicateTreatment::Distinct));
                for arg in &list.args {
                    call.args.push(match arg {
                        sp::FunctionArg::Unnamed(sp::FunctionArgExpr::Expr(e)) => self.expr(e, ctx)?,
                        sp::FunctionArg::Unnamed(sp::FunctionArgExpr::Wildcard) => Expr::Wildcard,
                        _ => return self.unsupported("named or qualified-wildcard argument", span),
                    });
                }
                for clause in &list.clauses {
                    match clause {
                        sp::FunctionArgumentClause::OrderBy(items) => {
                            call.arg_order_by = self.order_items(items, ctx)?;
                        }
                        _ => return self.unsupported("function argument clause", span),
                    }
                }
            }
        }
        if let Some(filter) = &f.filter {
            call.filter = Some(self.boxed(filter, ctx)?);
        }
        if let Some(over) = &f.over {
            let spec = match over {
                sp::WindowType::WindowSpec(spec) => spec,
                sp::WindowType::NamedWindow(_) => return self.unsupported("named window", span),
            };
            if spec.window_name.is_some() {
                return self.unsupported("named window", span);
            }
            call.over = Some(WindowSpec {
                partition_by: self.exprs(&spec.partition_by, ctx)?,
                order_by: self.order_items(&spec.order_by, ctx)?,
                frame: spec.window_frame.as_ref().map(frame_text),
            });
        }
        Ok(call)
    }
}

fn plain_call() -> FunctionCall {
    FunctionCall {
        name: String::new(),
        args: Vec::new(),
        distinct: false,
        has_parens: true,
        arg_order_by: Vec::new(),
        filter: None,
        over: None,
        style: CallStyle::Plain,
    }
}

pub(crate) fn ident(i: &sp::Ident) -> Ident {
    match i.quote_style {
        Some('"') | Some('`') | Some('[') => Ident::quoted(i.value.clone()),
        _ => Ident::new(i.value.clone()),
    }
}

type Arm<'q> = (&'q sp::SetOperator, &'q sp::SetQuantifier, &'q sp::SetExpr);

/// Split a left-deep chain of set operations into its leading operand and
/// the right-hand arms in order.
fn flatten_set_expr(body: &sp::SetExpr) -> (&sp::SetExpr, Vec<Arm<'_>>) {
    match body {
        sp::SetExpr::SetOperation { op, set_quantifier, left, right } => {
            let (lead, mut arms) = flatten_set_expr(left);
            arms.push((op, set_quantifier, right));
            (lead, arms)
        }
        other => (other, Vec::new()),
    }
}

fn set_operator(op: &sp::SetOperator) -> SetOperator {
    match op {
        sp::SetOperator::Union => SetOperator::Union,
        sp::SetOperator::Intersect => SetOperator::Intersect,
        sp::SetOperator::Except | sp::SetOperator::Minus => SetOperator::Except,
    }
}

fn binary_op(op: &sp::BinaryOperator) -> BinaryOp {
    use sp::BinaryOperator as B;
    match op {
        B::Plus => BinaryOp::Plus,
        B::Minus => BinaryOp::Minus,
        B::Multiply => BinaryOp::Multiply,
        B::Divide => BinaryOp::Divide,
        B::Modulo => BinaryOp::Modulo,
        B::StringConcat => BinaryOp::Concat,
        B::Eq => BinaryOp::Eq,
        B::NotEq => BinaryOp::NotEq,
        B::Lt => BinaryOp::Lt,
        B::LtEq => BinaryOp::LtEq,
        B::Gt => BinaryOp::Gt,
        B::GtEq => BinaryOp::GtEq,
        B::And => BinaryOp::And,
        B::Or => BinaryOp::Or,
        other => BinaryOp::Other(other.to_string()),
    }
}

fn frame_text(w: &sp::WindowFrame) -> String {
    let text = match &w.end_bound {
        Some(end) => format!("{} BETWEEN {} AND {}", w.units, w.start_bound, end),
        None => format!("{} {}", w.units, w.start_bound),
    };
    text.to_uppercase()
}

fn value_text(v: &sp::Value) -> String {
    match v {
        sp::Value::SingleQuotedString(s) => s.clone(),
        other => other.to_string(),
    }
}

fn set_expr_name(e: &sp::SetExpr) -> &'static str {
    match e {
        sp::SetExpr::Select(_) => "SELECT",
        sp::SetExpr::Query(_) => "parenthesized query",
        sp::SetExpr::SetOperation { .. } => "set operation",
        sp::SetExpr::Values(_) => "VALUES",
        sp::SetExpr::Insert(_) => "INSERT",
        sp::SetExpr::Update(_) => "UPDATE",
        sp::SetExpr::Delete(_) => "DELETE",
        sp::SetExpr::Merge(_) => "MERGE",
        sp::SetExpr::Table(_) => "TABLE",
    }
}

fn table_factor_name(t: &sp::TableFactor) -> &'static str {
    match t {
        sp::TableFactor::TableFunction { .. } | sp::TableFactor::Function { .. } => "table function",
        sp::TableFactor::UNNEST { .. } => "UNNEST",
        sp::TableFactor::JsonTable { .. } | sp::TableFactor::OpenJsonTable { .. } => "JSON_TABLE",
        sp::TableFactor::Pivot { .. } => "PIVOT",
        sp::TableFactor::Unpivot { .. } => "UNPIVOT",
        sp::TableFactor::MatchRecognize { .. } => "MATCH_RECOGNIZE",
        sp::TableFactor::XmlTable { .. } => "XMLTABLE",
        _ => "table factor",
    }
}

fn expr_name(e: &sp::Expr) -> String {
    let debug = format!("{e:?}");
    let name: String = debug.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
    format!("expression {name}")
}
