//! Structural features of a resolved query.

mod bag;
mod extract;
mod predicate;

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bag::Bag;
pub use extract::{is_aggregate, FeatureExtractor};
pub use predicate::{basic_predicates, PredicateTuple};

use crate::catalog::{CanonicalColumn, SchemaCatalog};
use crate::frontend::{NodeId, QueryTree};

/// `⟨agg, expr, group-by columns⟩`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AggTuple {
    pub agg: String,
    pub expr: String,
    pub group_by: Vec<CanonicalColumn>,
}

impl fmt::Display for AggTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols: Vec<String> = self.group_by.iter().map(|c| c.to_string()).collect();
        write!(f, "<{}, {}, [{}]>", self.agg, self.expr, cols.join(", "))
    }
}

/// Unordered pair of physical tables; stored with `first <= second`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct JoinPair {
    pub first: String,
    pub second: String,
}

impl JoinPair {
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Self {
        let (a, b) = (a.into(), b.into());
        if a <= b {
            JoinPair { first: a, second: b }
        } else {
            JoinPair { first: b, second: a }
        }
    }
}

impl fmt::Display for JoinPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.first, self.second)
    }
}

/// The bag-valued features, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    ColsSelect,
    ColsAll,
    Relations,
    WherePreds,
    JoinPairs,
    Aggregations,
    Functions,
}

impl Feature {
    pub const ALL: [Feature; 7] = [
        Feature::ColsSelect,
        Feature::ColsAll,
        Feature::Relations,
        Feature::WherePreds,
        Feature::JoinPairs,
        Feature::Aggregations,
        Feature::Functions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::ColsSelect => "cols_select",
            Feature::ColsAll => "cols_all",
            Feature::Relations => "relations",
            Feature::WherePreds => "where_preds",
            Feature::JoinPairs => "join_pairs",
            Feature::Aggregations => "aggregations",
            Feature::Functions => "functions",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| format!("unknown feature `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FeatureOptions {
    /// Keep occurrence counts instead of deduplicating.
    pub multiset: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct FeatureVector {
    pub cols_select: Bag<CanonicalColumn>,
    pub cols_all: Bag<CanonicalColumn>,
    pub relations: Bag<String>,
    pub where_preds: Bag<PredicateTuple>,
    pub join_pairs: Bag<JoinPair>,
    pub aggregations: Bag<AggTuple>,
    pub functions: Bag<String>,
    pub cte_count: usize,
    pub subquery_count: usize,
    pub func_expr_count: usize,
}

impl FeatureVector {
    /// A bag feature as canonical strings.
    pub fn bag(&self, feature: Feature) -> Bag<String> {
        match feature {
            Feature::ColsSelect => self.cols_select.to_string_bag(),
            Feature::ColsAll => self.cols_all.to_string_bag(),
            Feature::Relations => self.relations.clone(),
            Feature::WherePreds => self.where_preds.to_string_bag(),
            Feature::JoinPairs => self.join_pairs.to_string_bag(),
            Feature::Aggregations => self.aggregations.to_string_bag(),
            Feature::Functions => self.functions.clone(),
        }
    }

    /// `F#`: the cardinality of a bag feature.
    pub fn cardinality(&self, feature: Feature) -> usize {
        match feature {
            Feature::ColsSelect => self.cols_select.len(),
            Feature::ColsAll => self.cols_all.len(),
            Feature::Relations => self.relations.len(),
            Feature::WherePreds => self.where_preds.len(),
            Feature::JoinPairs => self.join_pairs.len(),
            Feature::Aggregations => self.aggregations.len(),
            Feature::Functions => self.functions.len(),
        }
    }

    /// JSON document with sorted bags, their cardinalities and the counts.
    pub fn to_json(&self) -> serde_json::Value {
        let mut doc = serde_json::to_value(self).expect("feature vector serializes");
        let cards: serde_json::Map<String, serde_json::Value> =
            Feature::ALL.iter().map(|f| (f.name().to_string(), self.cardinality(*f).into())).collect();
        doc.as_object_mut().expect("object").insert("cardinalities".into(), cards.into());
        doc
    }
}

fn ensure_resolved(tree: &QueryTree) -> Cow<'_, QueryTree> {
    if tree.is_resolved() {
        Cow::Borrowed(tree)
    } else {
        Cow::Owned(tree.resolved(&SchemaCatalog::empty()))
    }
}

/// All features of the whole statement, set semantics.
pub fn feature_vector(tree: &QueryTree) -> FeatureVector {
    feature_vector_with(tree, FeatureOptions::default())
}

pub fn feature_vector_with(tree: &QueryTree, options: FeatureOptions) -> FeatureVector {
    let tree = ensure_resolved(tree);
    FeatureExtractor::new(&tree, options).vector(tree.root())
}

/// Features of the subquery rooted at `node` within its enclosing statement.
pub fn node_feature_vector(tree: &QueryTree, node: NodeId, options: FeatureOptions) -> FeatureVector {
    let tree = ensure_resolved(tree);
    FeatureExtractor::new(&tree, options).vector(node)
}

macro_rules! extractor {
    ($(#[$doc:meta])* $name:ident -> $ty:ty, $method:ident) => {
        $(#[$doc])*
        pub fn $name(tree: &QueryTree) -> $ty {
            let tree = ensure_resolved(tree);
            FeatureExtractor::new(&tree, FeatureOptions::default()).$method(tree.root())
        }
    };
}

extractor!(
    /// Columns mentioned in SELECT expressions of the query and all subqueries.
    extract_select_columns -> Bag<CanonicalColumn>, cols_select
);
extractor!(
    /// Columns in SELECT, JOIN conditions, WHERE, GROUP BY and HAVING.
    extract_all_columns -> Bag<CanonicalColumn>, cols_all
);
extractor!(
    /// Physical tables read anywhere in the query.
    extract_relations -> Bag<String>, relations
);
extractor!(
    /// Basic predicates of every WHERE and HAVING clause.
    extract_where_predicates -> Bag<PredicateTuple>, where_preds
);
extractor!(
    /// Table pairs joined explicitly or through WHERE equalities.
    extract_join_pairs -> Bag<JoinPair>, join_pairs
);
extractor!(
    /// Aggregate applications with the GROUP BY columns of their query block.
    extract_aggregations -> Bag<AggTuple>, aggregations
);
extractor!(
    /// Uppercased names of all function applications.
    extract_functions -> Bag<String>, functions
);
extractor!(
    /// Top-level expressions containing at least one function call.
    count_func_exprs -> usize, func_expr_count
);
extractor!(
    /// WITH entries at any depth.
    count_ctes -> usize, cte_count
);
