//! Complexity distributions of a query corpus and baseline-normalized means.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::{feature_vector, FeatureVector};
use crate::frontend::QueryTree;

/// Per-query complexity metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "where_predicates")]
    WherePredicates,
    #[serde(rename = "ctes")]
    Ctes,
    #[serde(rename = "columns(all-positions)")]
    Columns,
    #[serde(rename = "function_exprs")]
    FunctionExprs,
    #[serde(rename = "subqueries")]
    Subqueries,
    #[serde(rename = "joins")]
    Joins,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::WherePredicates,
        Metric::Ctes,
        Metric::Columns,
        Metric::FunctionExprs,
        Metric::Subqueries,
        Metric::Joins,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::WherePredicates => "where_predicates",
            Metric::Ctes => "ctes",
            Metric::Columns => "columns(all-positions)",
            Metric::FunctionExprs => "function_exprs",
            Metric::Subqueries => "subqueries",
            Metric::Joins => "joins",
        }
    }

    /// Name usable in file names.
    pub fn slug(self) -> &'static str {
        match self {
            Metric::Columns => "columns",
            other => other.name(),
        }
    }

    pub fn of(self, v: &FeatureVector) -> usize {
        match self {
            Metric::WherePredicates => v.where_preds.len(),
            Metric::Ctes => v.cte_count,
            Metric::Columns => v.cols_all.len(),
            Metric::FunctionExprs => v.func_expr_count,
            Metric::Subqueries => v.subquery_count,
            Metric::Joins => v.join_pairs.len(),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Metric::ALL.into_iter().find(|m| m.name() == s || m.slug() == s).ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

/// Parse a comma-separated metric list.
pub fn parse_metrics(list: &str) -> Result<Vec<Metric>, String> {
    let mut out: Vec<Metric> = Vec::new();
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        let m: Metric = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out.sort();
    Ok(out)
}

pub type QueryMetrics = BTreeMap<Metric, usize>;

pub fn query_metrics(v: &FeatureVector) -> QueryMetrics {
    Metric::ALL.iter().map(|m| (*m, m.of(v))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SkippedQuery {
    pub query_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub corpus: String,
    pub n_queries: usize,
    /// metric → exact count value → number of queries.
    pub per_metric_histogram: BTreeMap<Metric, BTreeMap<usize, usize>>,
    pub per_metric_mean: BTreeMap<Metric, f64>,
    pub skipped: Vec<SkippedQuery>,
}

impl CorpusStats {
    pub fn from_metrics<'a>(corpus: &str, rows: impl IntoIterator<Item = &'a QueryMetrics>) -> Self {
        let mut hist: BTreeMap<Metric, BTreeMap<usize, usize>> =
            Metric::ALL.iter().map(|m| (*m, BTreeMap::new())).collect();
        let mut n = 0;
        for row in rows {
            n += 1;
            for m in Metric::ALL {
                *hist.get_mut(&m).expect("all metrics").entry(row.get(&m).copied().unwrap_or(0)).or_default() += 1;
            }
        }
        let per_metric_mean = hist
            .iter()
            .map(|(m, h)| {
                let total: usize = h.iter().map(|(v, f)| v * f).sum();
                (*m, if n == 0 { 0.0 } else { total as f64 / n as f64 })
            })
            .collect();
        CorpusStats {
            corpus: corpus.to_string(),
            n_queries: n,
            per_metric_histogram: hist,
            per_metric_mean,
            skipped: Vec::new(),
        }
    }

    pub fn with_skipped(mut self, mut skipped: Vec<SkippedQuery>) -> Self {
        skipped.sort();
        self.skipped = skipped;
        self
    }

    pub fn mean(&self, m: Metric) -> f64 {
        self.per_metric_mean.get(&m).copied().unwrap_or(0.0)
    }
}

/// Metrics of every tree, computed in parallel, then aggregated.
pub fn corpus_stats(queries: &[QueryTree], corpus: &str) -> CorpusStats {
    let rows: Vec<QueryMetrics> = queries.par_iter().map(|t| query_metrics(&feature_vector(t))).collect();
    CorpusStats::from_metrics(corpus, &rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZeroBaseline {
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedMeans {
    pub baseline: String,
    pub metrics: Vec<Metric>,
    pub per_corpus: BTreeMap<String, BTreeMap<Metric, f64>>,
    /// Metrics dropped because the baseline mean is zero.
    pub dropped: Vec<ZeroBaseline>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("baseline corpus `{0}` is not among the inputs")]
    MissingBaseline(String),
    #[error("corpus name `{0}` appears more than once")]
    DuplicateCorpus(String),
}

/// Divide every corpus mean by the baseline's mean, metric-wise.
pub fn normalize_means(
    stats: &[CorpusStats],
    baseline: &str,
    metrics: &[Metric],
) -> Result<NormalizedMeans, CorpusError> {
    let mut seen = std::collections::BTreeSet::new();
    for s in stats {
        if !seen.insert(s.corpus.as_str()) {
            return Err(CorpusError::DuplicateCorpus(s.corpus.clone()));
        }
    }
    let base = stats
        .iter()
        .find(|s| s.corpus == baseline)
        .ok_or_else(|| CorpusError::MissingBaseline(baseline.to_string()))?;
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for m in metrics {
        if base.mean(*m) > 0.0 {
            kept.push(*m);
        } else {
            log::warn!("baseline `{baseline}` has zero mean for {m}; metric dropped");
            dropped.push(ZeroBaseline { metric: *m });
        }
    }
    let per_corpus = stats
        .iter()
        .map(|s| (s.corpus.clone(), kept.iter().map(|m| (*m, s.mean(*m) / base.mean(*m))).collect()))
        .collect();
    Ok(NormalizedMeans { baseline: baseline.to_string(), metrics: kept, per_corpus, dropped })
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// `corpus,count_value,frequency` rows for one metric across corpora.
pub fn histogram_csv(stats: &[CorpusStats], metric: Metric) -> String {
    let mut w = writer();
    w.write_record(["corpus", "count_value", "frequency"]).expect("in-memory write");
    let mut sorted: Vec<&CorpusStats> = stats.iter().collect();
    sorted.sort_by(|a, b| a.corpus.cmp(&b.corpus));
    for s in sorted {
        for (v, f) in s.per_metric_histogram.get(&metric).into_iter().flatten() {
            w.write_record([s.corpus.as_str(), &v.to_string(), &f.to_string()]).expect("in-memory write");
        }
    }
    finish(w)
}

/// `corpus,n_queries,skipped,<metric means…>` with one row per corpus.
pub fn means_csv(stats: &[CorpusStats], metrics: &[Metric]) -> String {
    let mut w = writer();
    let mut header = vec!["corpus".to_string(), "n_queries".into(), "skipped".into()];
    header.extend(metrics.iter().map(|m| m.name().to_string()));
    w.write_record(&header).expect("in-memory write");
    let mut sorted: Vec<&CorpusStats> = stats.iter().collect();
    sorted.sort_by(|a, b| a.corpus.cmp(&b.corpus));
    for s in sorted {
        let mut row = vec![s.corpus.clone(), s.n_queries.to_string(), s.skipped.len().to_string()];
        row.extend(metrics.iter().map(|m| format!("{:.6}", s.mean(*m))));
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

impl NormalizedMeans {
    /// Wide table: `corpus,<metric…>`, baseline first, then by name.
    pub fn to_csv(&self) -> String {
        let mut w = writer();
        let mut header = vec!["corpus".to_string()];
        header.extend(self.metrics.iter().map(|m| m.name().to_string()));
        w.write_record(&header).expect("in-memory write");
        let mut names: Vec<&String> = self.per_corpus.keys().collect();
        names.sort_by_key(|n| (*n != &self.baseline, (*n).clone()));
        for name in names {
            let row_values = &self.per_corpus[name];
            let mut row = vec![name.clone()];
            row.extend(self.metrics.iter().map(|m| format!("{:.6}", row_values[m])));
            w.write_record(&row).expect("in-memory write");
        }
        finish(w)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("normalized means serialize")
    }
}
