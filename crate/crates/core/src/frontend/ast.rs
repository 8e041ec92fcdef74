//! Owned, arena-backed representation of one parsed SQL statement.
//!
//! Every SELECT core becomes one [`QueryNode`]. Subqueries, CTE bodies and
//! set-operation operands are separate nodes that their containing
//! expressions or clauses refer to by [`NodeId`], so all of them are
//! addressable and the parent links form a tree.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::CanonicalColumn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Grammar flavour handed to the tokenizer and parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    #[default]
    Postgres,
    Generic,
    Ansi,
    Sqlite,
    Mysql,
}

impl Dialect {
    pub fn name(self) -> &'static str {
        match self {
            Dialect::Postgres => "postgres",
            Dialect::Generic => "generic",
            Dialect::Ansi => "ansi",
            Dialect::Sqlite => "sqlite",
            Dialect::Mysql => "mysql",
        }
    }

    pub(crate) fn parser_dialect(self) -> Box<dyn sqlparser::dialect::Dialect> {
        use sqlparser::dialect as d;
        match self {
            Dialect::Postgres => Box::new(d::PostgreSqlDialect {}),
            Dialect::Generic => Box::new(d::GenericDialect {}),
            Dialect::Ansi => Box::new(d::AnsiDialect {}),
            Dialect::Sqlite => Box::new(d::SQLiteDialect {}),
            Dialect::Mysql => Box::new(d::MySqlDialect {}),
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "postgres" | "postgresql" | "pg" => Ok(Dialect::Postgres),
            "generic" => Ok(Dialect::Generic),
            "ansi" => Ok(Dialect::Ansi),
            "sqlite" => Ok(Dialect::Sqlite),
            "mysql" => Ok(Dialect::Mysql),
            other => Err(format!("unknown dialect `{other}`")),
        }
    }
}

/// An identifier after case normalization: unquoted names are lowercased,
/// quoted names are kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ident {
    pub value: String,
    pub quoted: bool,
}

impl Ident {
    pub fn new(value: impl Into<String>) -> Self {
        Ident { value: value.into().to_lowercase(), quoted: false }
    }

    pub fn quoted(value: impl Into<String>) -> Self {
        Ident { value: value.into(), quoted: true }
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.quoted {
            write!(f, "\"{}\"", self.value.replace('"', "\"\""))
        } else {
            f.write_str(&self.value)
        }
    }
}

/// Where a child node sits relative to its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Position {
    /// Body of the parent's k-th WITH entry.
    Cte(usize),
    Select,
    From,
    JoinOn,
    Where,
    GroupBy,
    Having,
    OrderBy,
    Limit,
    /// The k-th right-hand operand of the parent's set-operation chain.
    SetArm(usize),
}

impl Position {
    /// Expression positions see the parent's FROM items as an outer scope.
    pub fn is_expression(self) -> bool {
        !matches!(self, Position::Cte(_) | Position::From | Position::SetArm(_))
    }
}

#[derive(Debug, Clone)]
pub struct QueryTree {
    pub(crate) nodes: Vec<QueryNode>,
    pub(crate) root: NodeId,
    pub(crate) source_text: String,
    pub(crate) dialect: Dialect,
    pub(crate) resolution: Option<crate::resolve::Resolution>,
}

/// Structural equality: same nodes and dialect. Source text and resolution
/// annotations are ignored.
impl PartialEq for QueryTree {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.dialect == other.dialect && self.nodes == other.nodes
    }
}

impl QueryTree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn root_node(&self) -> &QueryNode {
        self.node(self.root)
    }

    pub fn node(&self, id: NodeId) -> &QueryNode {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> &[QueryNode] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    pub fn dialect(&self) -> Dialect {
        self.dialect
    }

    /// WITH entries of the top-level statement, in declaration order.
    pub fn cte_defs(&self) -> &[CteDef] {
        &self.root_node().with
    }

    pub fn is_resolved(&self) -> bool {
        self.resolution.is_some()
    }

    pub fn resolution(&self) -> Option<&crate::resolve::Resolution> {
        self.resolution.as_ref()
    }

    /// Proper descendants of `id` in pre-order.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.node(id).children.iter().rev().copied().collect();
        while let Some(next) = stack.pop() {
            out.push(next);
            stack.extend(self.node(next).children.iter().rev().copied());
        }
        out
    }

    /// `id` followed by its descendants.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = vec![id];
        out.extend(self.descendants(id));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryNode {
    pub id: NodeId,
    pub parent: Option<(NodeId, Position)>,
    pub with: Vec<CteDef>,
    pub distinct: Option<Distinct>,
    pub select: Vec<SelectItem>,
    pub from: Vec<FromItem>,
    pub where_pred: Option<Expr>,
    pub group_by: Vec<Expr>,
    pub having: Option<Expr>,
    pub order_by: Vec<OrderItem>,
    pub limit: Option<Expr>,
    pub offset: Option<Expr>,
    pub set_ops: Vec<SetOpArm>,
    /// Direct child nodes, in the order they were encountered.
    pub children: Vec<NodeId>,
}

impl QueryNode {
    pub(crate) fn empty(id: NodeId, parent: Option<(NodeId, Position)>) -> Self {
        QueryNode {
            id,
            parent,
            with: Vec::new(),
            distinct: None,
            select: Vec::new(),
            from: Vec::new(),
            where_pred: None,
            group_by: Vec::new(),
            having: None,
            order_by: Vec::new(),
            limit: None,
            offset: None,
            set_ops: Vec::new(),
            children: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CteDef {
    pub name: Ident,
    pub columns: Vec<Ident>,
    pub body: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Distinct {
    All,
    On(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectItem {
    Expr { expr: Expr, alias: Option<Ident> },
    Wildcard,
    QualifiedWildcard(Vec<Ident>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableAlias {
    pub name: Ident,
    pub columns: Vec<Ident>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FromItem {
    Table { name: Vec<Ident>, alias: Option<TableAlias> },
    Derived { node: NodeId, alias: Option<TableAlias> },
    Join { left: Box<FromItem>, right: Box<FromItem>, kind: JoinKind, constraint: JoinConstraint },
}

impl FromItem {
    /// Leaf relations (tables and derived tables) in left-to-right order.
    pub fn leaves(&self) -> Vec<&FromItem> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a FromItem>) {
        match self {
            FromItem::Join { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
            leaf => out.push(leaf),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JoinKind {
    Inner,
    Left,
    Right,
    Full,
    Cross,
}

impl JoinKind {
    pub fn keyword(self) -> &'static str {
        match self {
            JoinKind::Inner => "JOIN",
            JoinKind::Left => "LEFT JOIN",
            JoinKind::Right => "RIGHT JOIN",
            JoinKind::Full => "FULL JOIN",
            JoinKind::Cross => "CROSS JOIN",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JoinConstraint {
    On(Expr),
    Using(Vec<Ident>),
    Natural,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetOperator {
    Union,
    Intersect,
    Except,
}

impl SetOperator {
    pub fn keyword(self) -> &'static str {
        match self {
            SetOperator::Union => "UNION",
            SetOperator::Intersect => "INTERSECT",
            SetOperator::Except => "EXCEPT",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetOpArm {
    pub op: SetOperator,
    pub all: bool,
    pub node: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderItem {
    pub expr: Expr,
    pub asc: Option<bool>,
    pub nulls_first: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    /// Numeric text as written; canonical forms normalize it separately.
    Number(String),
    String(String),
    Boolean(bool),
    Null,
    Typed {
        data_type: String,
        value: String,
    },
    Placeholder(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Minus,
    Plus,
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Plus,
    Minus,
    Multiply,
    Divide,
    Modulo,
    Concat,
    Eq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
    And,
    Or,
    Other(String),
}

impl BinaryOp {
    pub fn symbol(&self) -> &str {
        match self {
            BinaryOp::Plus => "+",
            BinaryOp::Minus => "-",
            BinaryOp::Multiply => "*",
            BinaryOp::Divide => "/",
            BinaryOp::Modulo => "%",
            BinaryOp::Concat => "||",
            BinaryOp::Eq => "=",
            BinaryOp::NotEq => "<>",
            BinaryOp::Lt => "<",
            BinaryOp::LtEq => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::GtEq => ">=",
            BinaryOp::And => "AND",
            BinaryOp::Or => "OR",
            BinaryOp::Other(s) => s,
        }
    }

    pub fn is_comparison(&self) -> bool {
        matches!(self, BinaryOp::Eq | BinaryOp::NotEq | BinaryOp::Lt | BinaryOp::LtEq | BinaryOp::Gt | BinaryOp::GtEq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Any,
    All,
}

/// Keyword forms of built-in calls that do not use plain argument lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CallStyle {
    Plain,
    /// `SUBSTRING(x FROM a FOR b)`; the comma form is `Plain`.
    SubstringFromFor {
        has_from: bool,
        has_for: bool,
    },
    /// `EXTRACT(field FROM x)`
    Extract(String),
    /// `TRIM([where] [what] FROM x)`; args are `[x]` or `[x, what]`.
    Trim {
        trim_where: Option<String>,
    },
    /// `POSITION(a IN b)`
    Position,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    pub partition_by: Vec<Expr>,
    pub order_by: Vec<OrderItem>,
    /// Frame clause rendered as text, e.g. `ROWS BETWEEN UNBOUNDED PRECEDING AND CURRENT ROW`.
    pub frame: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionCall {
    /// Uppercased unless quoted; multi-part names joined with `.`.
    pub name: String,
    pub args: Vec<Expr>,
    pub distinct: bool,
    pub has_parens: bool,
    pub arg_order_by: Vec<OrderItem>,
    pub filter: Option<Box<Expr>>,
    pub over: Option<WindowSpec>,
    pub style: CallStyle,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupingSet {
    Rollup(Vec<Vec<Expr>>),
    Cube(Vec<Vec<Expr>>),
    Sets(Vec<Vec<Expr>>),
}

/// A column reference as written, plus the annotation `resolve` fills in.
#[derive(Debug, Clone)]
pub struct ColumnRef {
    pub qualifier: Vec<Ident>,
    pub name: Ident,
    pub binding: Option<Binding>,
}

impl PartialEq for ColumnRef {
    fn eq(&self, other: &Self) -> bool {
        self.qualifier == other.qualifier && self.name == other.name
    }
}

/// Result of resolving one column reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Binding {
    /// Base columns this reference ultimately reads, sorted and deduplicated.
    pub columns: Vec<CanonicalColumn>,
    /// Canonical rendering with aliases, CTEs and derived tables inlined.
    pub render: String,
    /// Node whose FROM clause (or select list) supplied the column.
    pub scope: Option<NodeId>,
    /// Index into that node's source list, when the column came from a FROM item.
    pub source: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Column(ColumnRef),
    Literal(Literal),
    /// Bare `*` as a function argument, as in `COUNT(*)`.
    Wildcard,
    Unary {
        op: UnaryOp,
        expr: Box<Expr>,
    },
    Binary {
        left: Box<Expr>,
        op: BinaryOp,
        right: Box<Expr>,
    },
    Function(FunctionCall),
    Case {
        operand: Option<Box<Expr>>,
        branches: Vec<(Expr, Expr)>,
        else_result: Option<Box<Expr>>,
    },
    Cast {
        expr: Box<Expr>,
        data_type: String,
    },
    Between {
        expr: Box<Expr>,
        low: Box<Expr>,
        high: Box<Expr>,
        negated: bool,
    },
    InList {
        expr: Box<Expr>,
        list: Vec<Expr>,
        negated: bool,
    },
    InSubquery {
        expr: Box<Expr>,
        query: NodeId,
        negated: bool,
    },
    Exists {
        query: NodeId,
        negated: bool,
    },
    Subquery(NodeId),
    IsNull {
        expr: Box<Expr>,
        negated: bool,
    },
    IsBool {
        expr: Box<Expr>,
        value: bool,
        negated: bool,
    },
    IsDistinctFrom {
        left: Box<Expr>,
        right: Box<Expr>,
        negated: bool,
    },
    Like {
        expr: Box<Expr>,
        pattern: Box<Expr>,
        negated: bool,
        case_insensitive: bool,
        escape: Option<String>,
    },
    Quantified {
        left: Box<Expr>,
        op: BinaryOp,
        quantifier: Quantifier,
        right: Box<Expr>,
    },
    Nested(Box<Expr>),
    Tuple(Vec<Expr>),
    Interval {
        value: Box<Expr>,
        unit: Option<String>,
    },
    Grouping(GroupingSet),
}

impl Expr {
    /// Visit this expression and every sub-expression, without entering
    /// subquery nodes.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        self.for_each_child(&mut |c| c.walk(f));
    }

    pub fn walk_mut(&mut self, f: &mut dyn FnMut(&mut Expr)) {
        f(self);
        self.for_each_child_mut(&mut |c| c.walk_mut(f));
    }

    /// Subquery nodes referenced directly by this expression tree.
    pub fn subqueries(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.walk(&mut |e| match e {
            Expr::InSubquery { query, .. } | Expr::Exists { query, .. } | Expr::Subquery(query) => out.push(*query),
            _ => {}
        });
        out
    }

    pub fn for_each_child<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        match self {
            Expr::Column(_) | Expr::Literal(_) | Expr::Wildcard | Expr::Exists { .. } | Expr::Subquery(_) => {}
            Expr::Unary { expr, .. }
            | Expr::Cast { expr, .. }
            | Expr::IsNull { expr, .. }
            | Expr::IsBool { expr, .. }
            | Expr::Nested(expr)
            | Expr::InSubquery { expr, .. } => f(expr),
            Expr::Interval { value, .. } => f(value),
            Expr::Binary { left, right, .. }
            | Expr::IsDistinctFrom { left, right, .. }
            | Expr::Quantified { left, right, .. } => {
                f(left);
                f(right);
            }
            Expr::Like { expr, pattern, .. } => {
                f(expr);
                f(pattern);
            }
            Expr::Between { expr, low, high, .. } => {
                f(expr);
                f(low);
                f(high);
            }
            Expr::InList { expr, list, .. } => {
                f(expr);
                list.iter().for_each(&mut *f);
            }
            Expr::Tuple(items) => items.iter().for_each(&mut *f),
            Expr::Function(call) => {
                call.args.iter().for_each(&mut *f);
                call.arg_order_by.iter().for_each(|o| f(&o.expr));
                if let Some(filter) = &call.filter {
                    f(filter);
                }
                if let Some(w) = &call.over {
                    w.partition_by.iter().for_each(&mut *f);
                    w.order_by.iter().for_each(|o| f(&o.expr));
                }
            }
            Expr::Case { operand, branches, else_result } => {
                if let Some(op) = operand {
                    f(op);
                }
                for (when, then) in branches {
                    f(when);
                    f(then);
                }
                if let Some(e) = else_result {
                    f(e);
                }
            }
            Expr::Grouping(set) => {
                let groups = match set {
                    GroupingSet::Rollup(g) | GroupingSet::Cube(g) | GroupingSet::Sets(g) => g,
                };
                groups.iter().flatten().for_each(&mut *f);
            }
        }
    }

    pub fn for_each_child_mut(&mut self, f: &mut dyn FnMut(&mut Expr)) {
        match self {
            Expr::Column(_) | Expr::Literal(_) | Expr::Wildcard | Expr::Exists { .. } | Expr::Subquery(_) => {}
            Expr::Unary { expr, .. }
            | Expr::Cast { expr, .. }
            | Expr::IsNull { expr, .. }
            | Expr::IsBool { expr, .. }
            | Expr::Nested(expr)
            | Expr::InSubquery { expr, .. } => f(expr),
            Expr::Interval { value, .. } => f(value),
            Expr::Binary { left, right, .. }
            | Expr::IsDistinctFrom { left, right, .. }
            | Expr::Quantified { left, right, .. } => {
                f(left);
                f(right);
            }
            Expr::Like { expr, pattern, .. } => {
                f(expr);
                f(pattern);
            }
            Expr::Between { expr, low, high, .. } => {
                f(expr);
                f(low);
                f(high);
            }
            Expr::InList { expr, list, .. } => {
                f(expr);
                list.iter_mut().for_each(&mut *f);
            }
            Expr::Tuple(items) => items.iter_mut().for_each(&mut *f),
            Expr::Function(call) => {
                call.args.iter_mut().for_each(&mut *f);
                call.arg_order_by.iter_mut().for_each(|o| f(&mut o.expr));
                if let Some(filter) = &mut call.filter {
                    f(filter);
                }
                if let Some(w) = &mut call.over {
                    w.partition_by.iter_mut().for_each(&mut *f);
                    w.order_by.iter_mut().for_each(|o| f(&mut o.expr));
                }
            }
            Expr::Case { operand, branches, else_result } => {
                if let Some(op) = operand {
                    f(op);
                }
                for (when, then) in branches {
                    f(when);
                    f(then);
                }
                if let Some(e) = else_result {
                    f(e);
                }
            }
            Expr::Grouping(set) => {
                let groups = match set {
                    GroupingSet::Rollup(g) | GroupingSet::Cube(g) | GroupingSet::Sets(g) => g,
                };
                groups.iter_mut().flatten().for_each(&mut *f);
            }
        }
    }

    /// Strip redundant outer parentheses.
    pub fn unnested(&self) -> &Expr {
        let mut e = self;
        while let Expr::Nested(inner) = e {
            e = inner;
        }
        e
    }
}
