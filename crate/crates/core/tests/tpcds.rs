use std::time::Instant;

use sqlscope::{
    feature_vector, parse, resolve, Dialect, Feature, FeatureVector, QueryTree, ResolveMode, SchemaCatalog,
};

const DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/tpcds");

fn catalog() -> SchemaCatalog {
    SchemaCatalog::from_ddl(&std::fs::read_to_string(format!("{DIR}/schema.sql")).unwrap()).unwrap()
}

fn query_text(n: usize) -> String {
    std::fs::read_to_string(format!("{DIR}/query{n}.sql")).unwrap()
}

fn analyzed(n: usize, catalog: &SchemaCatalog) -> (QueryTree, FeatureVector) {
    let text = query_text(n);
    let sql = text.trim().trim_end_matches(';');
    let tree = resolve(&parse(sql, Dialect::Postgres).unwrap(), catalog, ResolveMode::Lenient).unwrap();
    let v = feature_vector(&tree);
    (tree, v)
}

/// (where predicates, CTEs, columns in all positions, function expressions,
/// subqueries, join pairs)
fn metrics(v: &FeatureVector) -> [usize; 6] {
    [v.where_preds.len(), v.cte_count, v.cols_all.len(), v.func_expr_count, v.subquery_count, v.join_pairs.len()]
}

#[test]
fn catalog_shape() {
    let cat = catalog();
    assert_eq!(cat.len(), 24);
    assert_eq!(cat.table("store_sales").unwrap().columns.len(), 23);
    assert_eq!(cat.table("date_dim").unwrap().columns.len(), 28);
}

#[test]
fn all_queries_parse_and_resolve() {
    let cat = catalog();
    let start = Instant::now();
    for n in 1..=99 {
        let text = query_text(n);
        let sql = text.trim().trim_end_matches(';');
        let tree = parse(sql, Dialect::Postgres).unwrap_or_else(|e| panic!("query{n}: {e}"));
        let tree = resolve(&tree, &cat, ResolveMode::Strict).unwrap_or_else(|e| panic!("query{n}: {e}"));
        let v = feature_vector(&tree);
        for c in v.cols_all.items() {
            assert!(c.resolved, "query{n}: {c} unresolved");
        }
    }
    assert!(start.elapsed().as_secs_f64() < 10.0, "took {:?}", start.elapsed());
}

#[test]
fn query1_hand_analysis() {
    let cat = catalog();
    let (tree, v) = analyzed(1, &cat);
    assert_eq!(tree.node_count(), 3);
    assert_eq!(tree.root_node().with.len(), 1);
    assert_eq!(tree.root_node().with[0].name.value, "customer_total_return");
    assert_eq!(v.cte_count, 1);
    assert_eq!(v.subquery_count, 2);
    assert_eq!(v.relations.to_strings(), ["customer", "date_dim", "store", "store_returns"]);
    assert_eq!(
        v.cols_select.to_strings(),
        [
            "customer.c_customer_id",
            "store_returns.sr_customer_sk",
            "store_returns.sr_return_amt",
            "store_returns.sr_store_sk"
        ]
    );
    assert_eq!(
        v.cols_all.to_strings(),
        [
            "customer.c_customer_id",
            "customer.c_customer_sk",
            "date_dim.d_date_sk",
            "date_dim.d_year",
            "store.s_state",
            "store.s_store_sk",
            "store_returns.sr_customer_sk",
            "store_returns.sr_return_amt",
            "store_returns.sr_returned_date_sk",
            "store_returns.sr_store_sk"
        ]
    );
    assert_eq!(
        v.join_pairs.to_strings(),
        ["(customer, store_returns)", "(date_dim, store_returns)", "(store, store_returns)"]
    );
    assert_eq!(
        v.aggregations.to_strings(),
        [
            "<AVG, SUM(store_returns.sr_return_amt), []>",
            "<SUM, store_returns.sr_return_amt, [store_returns.sr_customer_sk, store_returns.sr_store_sk]>"
        ]
    );
    assert_eq!(v.functions.to_strings(), ["AVG", "SUM"]);
    assert_eq!(v.func_expr_count, 2);
    let preds = v.where_preds.to_strings();
    assert_eq!(preds.len(), 7);
    for expected in [
        "<=, customer.c_customer_sk, store_returns.sr_customer_sk>",
        "<=, date_dim.d_date_sk, store_returns.sr_returned_date_sk>",
        "<=, date_dim.d_year, 2001>",
        "<=, store.s_state, 'TN'>",
        "<=, store.s_store_sk, store_returns.sr_store_sk>",
        "<=, store_returns.sr_store_sk, store_returns.sr_store_sk>",
    ] {
        assert!(preds.iter().any(|p| p == expected), "missing {expected} in {preds:?}");
    }
    assert!(preds.iter().any(|p| p.starts_with("<<, (SELECT AVG(SUM(store_returns.sr_return_amt)) * 1.2 FROM")
        && p.ends_with(", SUM(store_returns.sr_return_amt)>")));
}

#[test]
fn spot_checked_metrics() {
    let cat = catalog();
    let expected: [(usize, [usize; 6]); 6] = [
        (1, [7, 1, 10, 2, 2, 3]),
        (3, [4, 0, 10, 1, 0, 2]),
        (22, [4, 0, 12, 1, 0, 3]),
        (52, [5, 0, 10, 1, 0, 2]),
        (55, [5, 0, 10, 1, 0, 2]),
        (96, [7, 0, 10, 1, 0, 3]),
    ];
    for (n, m) in expected {
        let (_, v) = analyzed(n, &cat);
        assert_eq!(metrics(&v), m, "query{n}");
    }
}

#[test]
fn feature_cardinalities_are_consistent() {
    let cat = catalog();
    for n in 1..=99 {
        let (tree, v) = analyzed(n, &cat);
        for f in Feature::ALL {
            assert_eq!(v.cardinality(f), v.bag(f).len());
        }
        assert_eq!(v.subquery_count, tree.node_count() - 1, "query{n}");
    }
}
