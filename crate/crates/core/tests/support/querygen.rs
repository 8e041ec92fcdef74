//! Random query generator with controllable surface syntax.
//!
//! A generated [`Query`] is an abstract description; [`Query::render`] turns
//! it into SQL under a [`Style`] that varies alias names, whitespace,
//! comments, keyword case and the order of join sides without changing the
//! query's meaning.

#![allow(dead_code)]

use proptest::prelude::*;

pub const DDL: &str = "\
CREATE TABLE emp (id INT, name TEXT, dept_id INT, salary INT, age INT);
CREATE TABLE dept (id INT, title TEXT, region_id INT, budget INT);
CREATE TABLE region (id INT, label TEXT, size INT);
CREATE TABLE proj (id INT, dept_id INT, cost INT, year INT);
";

pub const TABLES: &[(&str, &[&str])] = &[
    ("emp", &["id", "name", "dept_id", "salary", "age"]),
    ("dept", &["id", "title", "region_id", "budget"]),
    ("region", &["id", "label", "size"]),
    ("proj", &["id", "dept_id", "cost", "year"]),
];

fn columns(table: usize) -> &'static [&'static str] {
    TABLES[table].1
}

#[derive(Debug, Clone)]
pub struct ColRef {
    pub source: usize,
    pub column: usize,
}

#[derive(Debug, Clone)]
pub enum Item {
    Col(ColRef),
    Func(&'static str, ColRef),
    Agg(&'static str, ColRef),
    CountStar,
}

#[derive(Debug, Clone)]
pub enum Cond {
    Cmp(ColRef, &'static str, i64),
    Between(ColRef, i64, i64),
    InList(ColRef, Vec<i64>),
    IsNull(ColRef, bool),
    Link(ColRef, ColRef),
    InSub(ColRef, Box<Block>),
    Exists(Box<Block>, bool),
    Or(Box<Cond>, Box<Cond>),
}

#[derive(Debug, Clone)]
pub struct Block {
    pub tables: Vec<usize>,
    pub explicit: bool,
    /// `links[j - 1]` joins source `j` to an earlier source.
    pub links: Vec<(ColRef, ColRef)>,
    pub items: Vec<Item>,
    pub star: bool,
    pub conds: Vec<Cond>,
    pub group_by: bool,
    /// Correlation to source 0 of the enclosing block.
    pub correlated: Option<(ColRef, usize)>,
    /// Table of the enclosing block's first source, set when rendering.
    pub outer_table: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Query {
    pub block: Block,
    /// Wrap the block in a CTE and select from it.
    pub cte: bool,
}

#[derive(Debug, Clone)]
pub struct Style {
    pub alias: String,
    pub output_alias: String,
    pub separators: Vec<&'static str>,
    pub lower_keywords: bool,
    pub swap: bool,
}

impl Style {
    pub fn plain() -> Self {
        Style { alias: "s".into(), output_alias: "o".into(), separators: vec![" "], lower_keywords: false, swap: false }
    }
}

pub fn style() -> impl Strategy<Value = Style> {
    let seps = prop::collection::vec(
        prop::sample::select(vec![" ", "\n", "\t ", " /* note */ ", "  \n\t", "\n-- remark\n", "\r\n"]),
        1..6,
    );
    ("[a-z]{1,4}", "[a-z]{1,3}", seps, any::<bool>(), any::<bool>()).prop_map(
        |(alias, out, separators, lower, swap)| Style {
            alias: format!("{alias}_"),
            output_alias: format!("{out}_"),
            separators,
            lower_keywords: lower,
            swap,
        },
    )
}

fn col_ref(n_sources: usize, tables: Vec<usize>) -> impl Strategy<Value = ColRef> {
    (0..n_sources).prop_flat_map(move |s| {
        let n = columns(tables[s]).len();
        (Just(s), 0..n).prop_map(|(source, column)| ColRef { source, column })
    })
}

fn item(n: usize, tables: Vec<usize>) -> impl Strategy<Value = Item> {
    prop_oneof![
        4 => col_ref(n, tables.clone()).prop_map(Item::Col),
        2 => (prop::sample::select(vec!["UPPER", "ABS", "COALESCE", "LENGTH"]), col_ref(n, tables.clone()))
            .prop_map(|(f, c)| Item::Func(f, c)),
        2 => (prop::sample::select(vec!["SUM", "AVG", "MIN", "MAX", "COUNT"]), col_ref(n, tables))
            .prop_map(|(f, c)| Item::Agg(f, c)),
        1 => Just(Item::CountStar),
    ]
}

fn leaf_cond(n: usize, tables: Vec<usize>) -> impl Strategy<Value = Cond> {
    let c = move || col_ref(n, tables.clone());
    prop_oneof![
        3 => (c(), prop::sample::select(vec!["=", "<>", "<", "<=", ">", ">="]), -50i64..500).prop_map(|(c, op, v)| Cond::Cmp(c, op, v)),
        1 => (c(), 0i64..50, 50i64..100).prop_map(|(c, lo, hi)| Cond::Between(c, lo, hi)),
        1 => (c(), prop::collection::vec(0i64..30, 1..4)).prop_map(|(c, v)| Cond::InList(c, v)),
        1 => (c(), any::<bool>()).prop_map(|(c, b)| Cond::IsNull(c, b)),
        1 => (c(), c()).prop_map(|(a, b)| Cond::Link(a, b)),
    ]
}

fn cond(n: usize, tables: Vec<usize>, depth: u32) -> BoxedStrategy<Cond> {
    let leaf = leaf_cond(n, tables.clone()).boxed();
    let or = (leaf_cond(n, tables.clone()), leaf_cond(n, tables.clone()))
        .prop_map(|(a, b)| Cond::Or(Box::new(a), Box::new(b)))
        .boxed();
    if depth == 0 {
        return prop_oneof![4 => leaf, 1 => or].boxed();
    }
    let t = tables.clone();
    let in_sub = (col_ref(n, tables.clone()), block(depth - 1, 1)).prop_map(|(c, b)| Cond::InSub(c, Box::new(b)));
    let exists = (block(depth - 1, 0), any::<bool>(), 0..columns(t[0]).len()).prop_map(move |(mut b, neg, outer)| {
        let inner = ColRef { source: 0, column: 0 };
        b.correlated = Some((inner, outer));
        Cond::Exists(Box::new(b), neg)
    });
    prop_oneof![6 => leaf, 1 => or, 1 => in_sub, 1 => exists].boxed()
}

/// A SELECT core. With `single > 0` the block projects exactly one plain
/// column, as needed by `IN (subquery)`.
pub fn block(depth: u32, single: usize) -> BoxedStrategy<Block> {
    prop::collection::vec(0..TABLES.len(), 1..=3)
        .prop_flat_map(move |tables| {
            let n = tables.len();
            let links = (1..n)
                .map(|j| {
                    let t = tables.clone();
                    (0..j).prop_flat_map(move |i| {
                        (0..columns(t[i]).len(), 0..columns(t[j]).len()).prop_map(move |(ci, cj)| {
                            (ColRef { source: i, column: ci }, ColRef { source: j, column: cj })
                        })
                    })
                })
                .collect::<Vec<_>>();
            let items = if single > 0 {
                col_ref(n, tables.clone()).prop_map(|c| vec![Item::Col(c)]).boxed()
            } else {
                prop::collection::vec(item(n, tables.clone()), 1..4).boxed()
            };
            (
                Just(tables.clone()),
                any::<bool>(),
                links,
                items,
                prop::bool::weighted(if single > 0 { 0.0 } else { 0.15 }),
                prop::collection::vec(cond(n, tables.clone(), depth), 0..4),
                any::<bool>(),
            )
        })
        .prop_map(|(tables, explicit, links, items, star, conds, group_by)| Block {
            tables,
            explicit,
            links,
            items,
            star,
            conds,
            group_by,
            correlated: None,
            outer_table: None,
        })
        .boxed()
}

pub fn query() -> impl Strategy<Value = Query> {
    (block(2, 0), prop::bool::weighted(0.25)).prop_map(|(block, cte)| Query { block, cte })
}

/// A single-core query whose WHERE clause is a conjunction of `k` basic
/// conditions that are pairwise distinct by construction.
pub fn conjunction_query() -> impl Strategy<Value = (Query, usize)> {
    block(0, 0).prop_flat_map(|mut b| {
        b.explicit = true;
        let n = b.tables.len();
        let tables = b.tables.clone();
        prop::collection::vec(leaf_cond(n, tables), 1..8).prop_map(move |conds| {
            let conds: Vec<Cond> = conds.into_iter().enumerate().map(|(i, c)| distinct_leaf(c, i as i64)).collect();
            let k = conds.len();
            let mut block = b.clone();
            block.conds = conds;
            (Query { block, cte: false }, k)
        })
    })
}

fn distinct_leaf(c: Cond, i: i64) -> Cond {
    let tag = 1000 + i;
    match c {
        Cond::Cmp(c, op, _) => Cond::Cmp(c, op, tag),
        Cond::Between(c, lo, _) => Cond::Between(c, lo, tag),
        Cond::InList(c, mut v) => {
            v.push(tag);
            Cond::InList(c, v)
        }
        Cond::IsNull(c, _) | Cond::Link(c, _) => Cond::Cmp(c, "=", tag),
        other => other,
    }
}

struct Ctx<'a> {
    style: &'a Style,
    out: String,
}

impl Ctx<'_> {
    fn kw(&mut self, k: &str) {
        if self.style.lower_keywords {
            self.out.push_str(&k.to_lowercase());
        } else {
            self.out.push_str(k);
        }
    }

    fn raw(&mut self, s: &str) {
        self.out.push_str(s);
    }

    fn sp(&mut self) {
        self.out.push(' ');
    }
}

impl Query {
    pub fn render(&self, style: &Style) -> String {
        let mut cx = Ctx { style, out: String::new() };
        if self.cte {
            let w = format!("{}cte", style.alias);
            cx.kw("WITH");
            cx.sp();
            cx.raw(&w);
            cx.sp();
            cx.kw("AS");
            cx.raw(" (");
            render_block(&mut cx, &self.block, 0, true);
            cx.raw(") ");
            cx.kw("SELECT");
            cx.sp();
            let n = outputs(&self.block).len();
            if n == 0 {
                cx.raw("*");
            } else {
                let names: Vec<String> = (0..n).map(|i| format!("{w}.{}{i}", style.output_alias)).collect();
                cx.raw(&names.join(", "));
            }
            cx.sp();
            cx.kw("FROM");
            cx.sp();
            cx.raw(&w);
        } else {
            render_block(&mut cx, &self.block, 0, false);
        }
        spread(&cx.out, &style.separators)
    }

    /// Same query with the top-level star replaced by its column list.
    pub fn expanded_star(&self) -> Query {
        let mut q = self.clone();
        if q.block.star {
            q.block.star = false;
            let mut items = Vec::new();
            for (s, t) in q.block.tables.iter().enumerate() {
                for c in 0..columns(*t).len() {
                    items.push(Item::Col(ColRef { source: s, column: c }));
                }
            }
            items.append(&mut q.block.items);
            q.block.items = items;
        }
        q
    }
}

/// Output columns of a block that the CTE wrapper can reference.
fn outputs(b: &Block) -> Vec<usize> {
    if b.star {
        return vec![];
    }
    (0..b.items.len()).collect()
}

fn alias(cx: &Ctx<'_>, depth: u32, source: usize) -> String {
    format!("{}{depth}_{source}", cx.style.alias)
}

fn col(cx: &Ctx<'_>, depth: u32, b: &Block, c: &ColRef) -> String {
    format!("{}.{}", alias(cx, depth, c.source), columns(b.tables[c.source])[c.column])
}

fn order(cx: &Ctx<'_>, b: &Block) -> Vec<usize> {
    let n = b.tables.len();
    if cx.style.swap && (!b.explicit || n == 2) {
        (0..n).rev().collect()
    } else {
        (0..n).collect()
    }
}

fn eq(cx: &mut Ctx<'_>, l: String, r: String) {
    if cx.style.swap {
        cx.raw(&format!("{r} = {l}"));
    } else {
        cx.raw(&format!("{l} = {r}"));
    }
}

fn render_block(cx: &mut Ctx<'_>, b: &Block, depth: u32, name_outputs: bool) {
    cx.kw("SELECT");
    cx.sp();
    let mut parts = Vec::new();
    if b.star {
        parts.push("*".to_string());
    }
    for (i, it) in b.items.iter().enumerate() {
        let mut text = match it {
            Item::Col(c) => col(cx, depth, b, c),
            Item::Func(f, c) if *f == "COALESCE" => format!("COALESCE({}, 0)", col(cx, depth, b, c)),
            Item::Func(f, c) | Item::Agg(f, c) => format!("{f}({})", col(cx, depth, b, c)),
            Item::CountStar => "COUNT(*)".into(),
        };
        if name_outputs {
            text = format!("{text} AS {}{i}", cx.style.output_alias);
        }
        parts.push(text);
    }
    cx.raw(&parts.join(", "));
    cx.sp();
    cx.kw("FROM");
    cx.sp();
    let ord = order(cx, b);
    let mut where_links = Vec::new();
    for (pos, &s) in ord.iter().enumerate() {
        let table = TABLES[b.tables[s]].0;
        let a = alias(cx, depth, s);
        if pos > 0 {
            if b.explicit {
                cx.sp();
                cx.kw("JOIN");
                cx.sp();
            } else {
                cx.raw(", ");
            }
        }
        cx.raw(&format!("{table} {a}"));
        if pos > 0 && b.explicit {
            // The ON clause carries every link whose later endpoint is `s`.
            let placed = &ord[..pos];
            let mine: Vec<&(ColRef, ColRef)> = b
                .links
                .iter()
                .filter(|(x, y)| {
                    (x.source == s && placed.contains(&y.source)) || (y.source == s && placed.contains(&x.source))
                })
                .collect();
            cx.sp();
            cx.kw("ON");
            cx.sp();
            for (k, (x, y)) in mine.iter().enumerate() {
                if k > 0 {
                    cx.sp();
                    cx.kw("AND");
                    cx.sp();
                }
                let (l, r) = (col(cx, depth, b, x), col(cx, depth, b, y));
                eq(cx, l, r);
            }
        }
    }
    if !b.explicit {
        where_links.extend(b.links.iter().cloned());
    }
    let mut first = true;
    let mut next = |cx: &mut Ctx<'_>| {
        cx.sp();
        if first {
            cx.kw("WHERE");
            first = false;
        } else {
            cx.kw("AND");
        }
        cx.sp();
    };
    for (x, y) in &where_links {
        next(cx);
        let (l, r) = (col(cx, depth, b, x), col(cx, depth, b, y));
        eq(cx, l, r);
    }
    if let Some((inner, outer)) = &b.correlated {
        next(cx);
        let l = col(cx, depth, b, inner);
        let r = format!("{}.{}", alias(cx, depth - 1, 0), outer_column(b, *outer));
        eq(cx, l, r);
    }
    for c in &b.conds {
        next(cx);
        render_cond(cx, b, depth, c);
    }
    if b.group_by {
        let keys: Vec<String> = b
            .items
            .iter()
            .filter_map(|it| match it {
                Item::Col(c) => Some(col(cx, depth, b, c)),
                Item::Func(f, c) if *f != "COALESCE" => Some(format!("{f}({})", col(cx, depth, b, c))),
                _ => None,
            })
            .collect();
        if !keys.is_empty() {
            cx.sp();
            cx.kw("GROUP BY");
            cx.sp();
            cx.raw(&keys.join(", "));
        }
    }
}

/// Column of the enclosing block's first source used for correlation.
fn outer_column(b: &Block, idx: usize) -> &'static str {
    let t = b.outer_table.expect("correlated block knows its outer table");
    let cols = columns(t);
    cols[idx % cols.len()]
}

fn render_cond(cx: &mut Ctx<'_>, b: &Block, depth: u32, c: &Cond) {
    match c {
        Cond::Cmp(c, op, v) => {
            let l = col(cx, depth, b, c);
            cx.raw(&format!("{l} {op} {v}"));
        }
        Cond::Between(c, lo, hi) => {
            let l = col(cx, depth, b, c);
            cx.raw(&l);
            cx.sp();
            cx.kw("BETWEEN");
            cx.raw(&format!(" {lo} "));
            cx.kw("AND");
            cx.raw(&format!(" {hi}"));
        }
        Cond::InList(c, vs) => {
            let l = col(cx, depth, b, c);
            let list: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
            cx.raw(&l);
            cx.sp();
            cx.kw("IN");
            cx.raw(&format!(" ({})", list.join(", ")));
        }
        Cond::IsNull(c, neg) => {
            let l = col(cx, depth, b, c);
            cx.raw(&l);
            cx.sp();
            cx.kw(if *neg { "IS NOT NULL" } else { "IS NULL" });
        }
        Cond::Link(x, y) => {
            let (l, r) = (col(cx, depth, b, x), col(cx, depth, b, y));
            eq(cx, l, r);
        }
        Cond::InSub(c, sub) => {
            let l = col(cx, depth, b, c);
            cx.raw(&l);
            cx.sp();
            cx.kw("IN");
            cx.raw(" (");
            render_block(cx, sub, depth + 1, false);
            cx.raw(")");
        }
        Cond::Exists(sub, neg) => {
            if *neg {
                cx.kw("NOT");
                cx.sp();
            }
            cx.kw("EXISTS");
            cx.raw(" (");
            let mut sub = sub.as_ref().clone();
            sub.outer_table = Some(b.tables[0]);
            render_block(cx, &sub, depth + 1, false);
            cx.raw(")");
        }
        Cond::Or(x, y) => {
            cx.raw("(");
            render_cond(cx, b, depth, x);
            cx.sp();
            cx.kw("OR");
            cx.sp();
            render_cond(cx, b, depth, y);
            cx.raw(")");
        }
    }
}

/// Replace each single space with a separator, cycling through the list.
fn spread(sql: &str, seps: &[&str]) -> String {
    let mut out = String::with_capacity(sql.len() * 2);
    let mut k = 0;
    for ch in sql.chars() {
        if ch == ' ' {
            out.push_str(seps[k % seps.len()]);
            k += 1;
        } else {
            out.push(ch);
        }
    }
    out
}
