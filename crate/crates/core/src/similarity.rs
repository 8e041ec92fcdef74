//! Feature-wise Jaccard similarity between a generated and a gold query.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::features::{feature_vector_with, Bag, Feature, FeatureOptions, FeatureVector};
use crate::frontend::QueryTree;

/// `|a ∩ b| / |a ∪ b|` over occurrence counts (`Σ min / Σ max`), which is
/// the plain set coefficient when both bags are sets. Two empty bags are
/// identical, so the coefficient is 1.0.
pub fn jaccard<T: Ord>(a: &Bag<T>, b: &Bag<T>) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (item, ca) in a.counts() {
        let cb = b.count(item);
        inter += ca.min(cb);
        union += ca.max(cb);
    }
    for (item, cb) in b.counts() {
        if !a.contains(item) {
            union += cb;
        }
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub query_id: String,
    pub generated_parsed: bool,
    pub per_feature: BTreeMap<Feature, f64>,
}

impl SimilarityReport {
    /// Report for a generation that could not be parsed; it carries no
    /// coefficients.
    pub fn failed(query_id: impl Into<String>) -> Self {
        SimilarityReport { query_id: query_id.into(), generated_parsed: false, per_feature: BTreeMap::new() }
    }

    pub fn with_id(mut self, query_id: impl Into<String>) -> Self {
        self.query_id = query_id.into();
        self
    }

    pub fn coefficient(&self, feature: Feature) -> Option<f64> {
        self.per_feature.get(&feature).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompareOptions {
    pub features: Vec<Feature>,
    pub multiset: bool,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions { features: Feature::ALL.to_vec(), multiset: false }
    }
}

/// Jaccard coefficient of every bag feature, default options.
pub fn compare(generated: &QueryTree, gold: &QueryTree) -> SimilarityReport {
    compare_with(generated, gold, &CompareOptions::default())
}

pub fn compare_with(generated: &QueryTree, gold: &QueryTree, options: &CompareOptions) -> SimilarityReport {
    let fo = FeatureOptions { multiset: options.multiset };
    compare_vectors(&feature_vector_with(generated, fo), &feature_vector_with(gold, fo), &options.features)
}

pub fn compare_vectors(generated: &FeatureVector, gold: &FeatureVector, features: &[Feature]) -> SimilarityReport {
    let per_feature = features.iter().map(|f| (*f, jaccard(&generated.bag(*f), &gold.bag(*f)))).collect();
    SimilarityReport { query_id: String::new(), generated_parsed: true, per_feature }
}

/// How reports for unparsed generations enter the means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailurePolicy {
    /// Failed generations are left out of the denominator.
    #[default]
    Exclude,
    /// Failed generations count as 0.0 on every feature.
    IncludeAsZero,
}

impl std::str::FromStr for FailurePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exclude" => Ok(FailurePolicy::Exclude),
            "include-as-zero" | "zero" => Ok(FailurePolicy::IncludeAsZero),
            other => Err(format!("unknown failure policy `{other}` (expected exclude or include-as-zero)")),
        }
    }
}

impl std::fmt::Display for FailurePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FailurePolicy::Exclude => "exclude",
            FailurePolicy::IncludeAsZero => "include-as-zero",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSimilaritySummary {
    pub model: String,
    pub per_feature_mean: BTreeMap<Feature, f64>,
    /// Reports that entered the means.
    pub n_compared: usize,
    pub n_failed: usize,
    pub policy: FailurePolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimilarityError {
    #[error("no reports to summarize under the {0} policy")]
    EmptyInput(FailurePolicy),
}

/// Arithmetic mean of each feature over the reports admitted by `policy`.
/// The feature list is the union of the features of the parsed reports.
pub fn summarize(
    reports: &[SimilarityReport],
    model: &str,
    policy: FailurePolicy,
) -> Result<ModelSimilaritySummary, SimilarityError> {
    let parsed: Vec<&SimilarityReport> = reports.iter().filter(|r| r.generated_parsed).collect();
    let n_failed = reports.len() - parsed.len();
    let n_compared = match policy {
        FailurePolicy::Exclude => parsed.len(),
        FailurePolicy::IncludeAsZero => reports.len(),
    };
    if n_compared == 0 {
        return Err(SimilarityError::EmptyInput(policy));
    }
    let mut sums: BTreeMap<Feature, f64> = BTreeMap::new();
    for r in &parsed {
        for (f, v) in &r.per_feature {
            *sums.entry(*f).or_default() += v;
        }
    }
    if sums.is_empty() {
        sums = Feature::ALL.iter().map(|f| (*f, 0.0)).collect();
    }
    let per_feature_mean = sums.into_iter().map(|(f, s)| (f, s / n_compared as f64)).collect();
    Ok(ModelSimilaritySummary { model: model.to_string(), per_feature_mean, n_compared, n_failed, policy })
}

/// Fixed-precision rendering used by every report writer.
pub fn format_coefficient(v: f64) -> String {
    format!("{v:.6}")
}

/// CSV with one row per report, sorted by query id, then a `__mean__` row.
///
/// Columns: `query_id, generated_parsed`, then one column per feature in
/// `features` order. Unparsed generations leave their coefficient cells
/// empty under [`FailurePolicy::Exclude`] and show zeros otherwise.
pub fn reports_csv(
    reports: &[SimilarityReport],
    summary: Option<&ModelSimilaritySummary>,
    features: &[Feature],
) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec!["query_id".to_string(), "generated_parsed".to_string()];
    header.extend(features.iter().map(|f| f.name().to_string()));
    w.write_record(&header).expect("in-memory write");
    let mut sorted: Vec<&SimilarityReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.query_id.cmp(&b.query_id));
    let zero_failed = summary.is_some_and(|s| s.policy == FailurePolicy::IncludeAsZero);
    for r in sorted {
        let mut row = vec![r.query_id.clone(), r.generated_parsed.to_string()];
        for f in features {
            row.push(match r.coefficient(*f) {
                Some(v) => format_coefficient(v),
                None if zero_failed => format_coefficient(0.0),
                None => String::new(),
            });
        }
        w.write_record(&row).expect("in-memory write");
    }
    if let Some(s) = summary {
        let mut row = vec!["__mean__".to_string(), s.n_compared.to_string()];
        for f in features {
            row.push(s.per_feature_mean.get(f).map(|v| format_coefficient(*v)).unwrap_or_default());
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
