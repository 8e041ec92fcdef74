//! Python bindings: `import sqlscope`.

use std::collections::BTreeMap;
use std::str::FromStr;

use pyo3::create_exception;
use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use sqlscope_core::corpus::{query_metrics, SkippedQuery};
use sqlscope_core::features::Bag;
use sqlscope_core::harness::{
    self as core_harness, ChatMessage, LlmClient, LlmError, Sampling, SqliteValidator, ValidationMode, Validator,
    ValidatorError, Verdict,
};
use sqlscope_core::similarity::{compare_with, CompareOptions};
use sqlscope_core::{
    feature_vector_with, parse, resolve, CorpusStats as CoreStats, Dialect, FailurePolicy, Feature, FeatureOptions,
    Metric, QueryTree, ResolveMode, SchemaCatalog, SimilarityReport,
};

create_exception!(sqlscope, SqlParseError, PyValueError, "The SQL text could not be parsed.");
create_exception!(sqlscope, ResolutionError, PyValueError, "A name could not be resolved in strict mode.");

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn from_json(py: Python<'_>, value: &impl serde::Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn dialect(name: &str) -> PyResult<Dialect> {
    Dialect::from_str(name).map_err(value_error)
}

fn metrics(names: Option<Vec<String>>) -> PyResult<Vec<Metric>> {
    match names {
        None => Ok(Metric::ALL.to_vec()),
        Some(names) => names.iter().map(|n| Metric::from_str(n).map_err(value_error)).collect(),
    }
}

/// Table definitions taken from a CREATE TABLE script.
#[pyclass(module = "sqlscope", frozen)]
#[derive(Clone)]
struct Catalog {
    inner: SchemaCatalog,
}

#[pymethods]
impl Catalog {
    #[new]
    #[pyo3(signature = (ddl=None))]
    fn new(ddl: Option<&str>) -> PyResult<Self> {
        let inner = match ddl {
            Some(ddl) => SchemaCatalog::from_ddl(ddl).map_err(value_error)?,
            None => SchemaCatalog::empty(),
        };
        Ok(Catalog { inner })
    }

    fn tables(&self) -> Vec<String> {
        self.inner.table_names().map(str::to_string).collect()
    }

    fn columns(&self, table: &str) -> PyResult<Vec<String>> {
        let t = self.inner.table(table).ok_or_else(|| PyKeyError::new_err(table.to_string()))?;
        Ok(t.column_names().map(str::to_string).collect())
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        from_json(py, &self.inner.to_json())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Catalog({} tables)", self.inner.len())
    }
}

fn parse_tree(sql: &str, catalog: Option<&Catalog>, dialect_name: &str, strict: bool) -> PyResult<QueryTree> {
    let tree = parse(sql, dialect(dialect_name)?).map_err(|e| SqlParseError::new_err(e.to_string()))?;
    let empty = SchemaCatalog::empty();
    let cat = catalog.map(|c| &c.inner).unwrap_or(&empty);
    let mode = if strict { ResolveMode::Strict } else { ResolveMode::Lenient };
    resolve(&tree, cat, mode).map_err(|e| ResolutionError::new_err(e.to_string()))
}

/// A parsed and resolved SELECT statement.
#[pyclass(module = "sqlscope", frozen)]
struct Query {
    tree: QueryTree,
}

#[pymethods]
impl Query {
    #[new]
    #[pyo3(signature = (sql, catalog=None, dialect="postgres", strict=false))]
    fn new(sql: &str, catalog: Option<&Catalog>, dialect: &str, strict: bool) -> PyResult<Self> {
        Ok(Query { tree: parse_tree(sql, catalog, dialect, strict)? })
    }

    /// Canonical SQL rendering.
    fn to_sql(&self) -> String {
        self.tree.to_sql()
    }

    /// Feature vector as a dict of sorted string lists plus counts.
    #[pyo3(signature = (multiset=false))]
    fn features(&self, py: Python<'_>, multiset: bool) -> PyResult<Py<PyAny>> {
        from_json(py, &feature_vector_with(&self.tree, FeatureOptions { multiset }).to_json())
    }

    /// The six corpus metrics of this query.
    fn metrics(&self) -> BTreeMap<String, usize> {
        let v = feature_vector_with(&self.tree, FeatureOptions::default());
        query_metrics(&v).into_iter().map(|(m, n)| (m.name().to_string(), n)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Query({:?})", self.tree.to_sql())
    }
}

/// Feature vector of one statement.
#[pyfunction]
#[pyo3(signature = (sql, ddl=None, dialect="postgres", multiset=false))]
fn analyze(py: Python<'_>, sql: &str, ddl: Option<&str>, dialect: &str, multiset: bool) -> PyResult<Py<PyAny>> {
    let catalog = Catalog::new(ddl)?;
    Query::new(sql, Some(&catalog), dialect, false)?.features(py, multiset)
}

/// Statements of a script, without their terminators.
#[pyfunction]
#[pyo3(signature = (script, dialect="postgres"))]
fn split_statements(script: &str, dialect: &str) -> PyResult<Vec<String>> {
    let parts = sqlscope_core::split_statements(script, self::dialect(dialect)?)
        .map_err(|e| SqlParseError::new_err(e.to_string()))?;
    Ok(parts.into_iter().map(|s| s.text).collect())
}

/// Jaccard coefficient of two collections of strings.
#[pyfunction]
#[pyo3(signature = (a, b, multiset=false))]
fn jaccard(a: Vec<String>, b: Vec<String>, multiset: bool) -> f64 {
    let bag = |items: Vec<String>| {
        let mut bag = Bag::new(multiset);
        for i in items {
            bag.insert(i);
        }
        bag
    };
    sqlscope_core::jaccard(&bag(a), &bag(b))
}

fn feature_list(names: Option<Vec<String>>) -> PyResult<Vec<Feature>> {
    match names {
        None => Ok(Feature::ALL.to_vec()),
        Some(names) => names.iter().map(|n| Feature::from_str(n).map_err(value_error)).collect(),
    }
}

/// Per-feature similarity of a generated query against a gold query.
#[pyfunction]
#[pyo3(signature = (generated, gold, catalog=None, multiset=false, features=None))]
fn compare(
    generated: &str,
    gold: &str,
    catalog: Option<&Catalog>,
    multiset: bool,
    features: Option<Vec<String>>,
) -> PyResult<BTreeMap<String, f64>> {
    let a = parse_tree(generated, catalog, "postgres", false)?;
    let b = parse_tree(gold, catalog, "postgres", false)?;
    let options = CompareOptions { features: feature_list(features)?, multiset };
    Ok(compare_with(&a, &b, &options).per_feature.into_iter().map(|(f, v)| (f.name().to_string(), v)).collect())
}

/// Mean coefficient per feature. Each report is a dict from `compare`, or
/// `None` for a generation that did not parse.
#[pyfunction]
#[pyo3(signature = (reports, model="model", policy="exclude"))]
fn summarize(
    py: Python<'_>,
    reports: Vec<Option<BTreeMap<String, f64>>>,
    model: &str,
    policy: &str,
) -> PyResult<Py<PyAny>> {
    let policy = FailurePolicy::from_str(policy).map_err(value_error)?;
    let mut parsed = Vec::with_capacity(reports.len());
    for (i, r) in reports.into_iter().enumerate() {
        let id = format!("{i}");
        parsed.push(match r {
            None => SimilarityReport::failed(id),
            Some(map) => {
                let mut per_feature = BTreeMap::new();
                for (name, v) in map {
                    per_feature.insert(Feature::from_str(&name).map_err(value_error)?, v);
                }
                SimilarityReport { query_id: id, generated_parsed: true, per_feature }
            }
        });
    }
    let summary = sqlscope_core::summarize(&parsed, model, policy).map_err(value_error)?;
    from_json(py, &summary)
}

/// Complexity histograms and means of one corpus.
#[pyclass(module = "sqlscope", frozen, from_py_object)]
#[derive(Clone)]
struct CorpusStats {
    inner: CoreStats,
}

#[pymethods]
impl CorpusStats {
    #[getter]
    fn corpus(&self) -> String {
        self.inner.corpus.clone()
    }

    #[getter]
    fn n_queries(&self) -> usize {
        self.inner.n_queries
    }

    #[getter]
    fn means(&self) -> BTreeMap<String, f64> {
        self.inner.per_metric_mean.iter().map(|(m, v)| (m.name().to_string(), *v)).collect()
    }

    /// Count value → number of queries for one metric.
    fn histogram(&self, metric: &str) -> PyResult<BTreeMap<usize, usize>> {
        let m = Metric::from_str(metric).map_err(value_error)?;
        Ok(self.inner.per_metric_histogram.get(&m).cloned().unwrap_or_default())
    }

    /// `(query_id, reason)` of every query left out.
    #[getter]
    fn skipped(&self) -> Vec<(String, String)> {
        self.inner.skipped.iter().map(|s| (s.query_id.clone(), s.reason.clone())).collect()
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        from_json(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!("CorpusStats({:?}, n_queries={})", self.inner.corpus, self.inner.n_queries)
    }
}

/// Statistics over a list of SQL strings. Statements that fail to parse are
/// recorded in `skipped`, keyed by their position.
#[pyfunction]
#[pyo3(signature = (queries, name="corpus", catalog=None, dialect="postgres"))]
fn corpus_stats(queries: Vec<String>, name: &str, catalog: Option<&Catalog>, dialect: &str) -> PyResult<CorpusStats> {
    let mut trees = Vec::new();
    let mut skipped = Vec::new();
    for (i, sql) in queries.iter().enumerate() {
        match parse_tree(sql, catalog, dialect, false) {
            Ok(t) => trees.push(t),
            Err(e) => skipped.push(SkippedQuery { query_id: i.to_string(), reason: e.to_string() }),
        }
    }
    Ok(CorpusStats { inner: sqlscope_core::corpus_stats(&trees, name).with_skipped(skipped) })
}

/// Means of every corpus divided by those of `baseline`.
#[pyfunction]
#[pyo3(signature = (stats, baseline, metrics=None))]
fn normalize_means(
    py: Python<'_>,
    stats: Vec<CorpusStats>,
    baseline: &str,
    metrics: Option<Vec<String>>,
) -> PyResult<Py<PyAny>> {
    let stats: Vec<CoreStats> = stats.into_iter().map(|s| s.inner).collect();
    let n = sqlscope_core::normalize_means(&stats, baseline, &self::metrics(metrics)?).map_err(value_error)?;
    from_json(py, &n.to_json())
}

/// `(system, user)` prompts for a question over a schema.
#[pyfunction]
fn build_prompts(ddl: &str, question: &str) -> PyResult<(String, String)> {
    let p = core_harness::build_prompts(ddl, question).map_err(value_error)?;
    Ok((p.system, p.user))
}

#[pyfunction]
fn build_repair_prompt(sql: &str, error: &str) -> PyResult<String> {
    core_harness::build_repair_prompt(sql, error).map_err(value_error)
}

/// SQL text of a model reply: the first fenced block, or the whole reply.
#[pyfunction]
fn extract_sql(reply: &str) -> String {
    core_harness::extract_sql(reply)
}

/// `None` when SQLite accepts `sql` against `ddl`, otherwise its error text.
#[pyfunction]
#[pyo3(signature = (ddl, sql, plan_only=false, row_limit=100))]
fn validate_sqlite(
    py: Python<'_>,
    ddl: &str,
    sql: &str,
    plan_only: bool,
    row_limit: usize,
) -> PyResult<Option<String>> {
    let mode = if plan_only { ValidationMode::Plan } else { ValidationMode::Execute { row_limit } };
    py.detach(|| {
        let v = SqliteValidator::in_memory(ddl, mode).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        match v.validate(sql).map_err(|e| PyRuntimeError::new_err(e.to_string()))? {
            Ok(()) => Ok(None),
            Err(msg) => Ok(Some(msg)),
        }
    })
}

/// Chat model backed by a Python callable taking a list of
/// `{"role", "content"}` dicts and returning the reply text.
struct PyLlm {
    model: String,
    func: Py<PyAny>,
}

fn unavailable(e: PyErr) -> String {
    Python::attach(|py| e.value(py).to_string())
}

impl LlmClient for PyLlm {
    fn model(&self) -> &str {
        &self.model
    }

    fn complete(&self, messages: &[ChatMessage], _: &Sampling) -> Result<String, LlmError> {
        Python::attach(|py| {
            let list = PyList::empty(py);
            for m in messages {
                let d = PyDict::new(py);
                d.set_item("role", &m.role)?;
                d.set_item("content", &m.content)?;
                list.append(d)?;
            }
            self.func.call1(py, (list,))?.extract::<String>(py)
        })
        .map_err(|e| LlmError::Unavailable(unavailable(e)))
    }
}

/// Validator backed by a Python callable returning `None` for accepted SQL
/// or the error message.
struct PyValidator {
    func: Py<PyAny>,
}

impl Validator for PyValidator {
    fn validate(&self, sql: &str) -> Result<Verdict, ValidatorError> {
        Python::attach(|py| self.func.call1(py, (sql,))?.extract::<Option<String>>(py))
            .map(|r| match r {
                None => Ok(()),
                Some(msg) => Err(msg),
            })
            .map_err(|e| ValidatorError::Unavailable(unavailable(e)))
    }
}

#[pyclass(module = "sqlscope", frozen, from_py_object)]
#[derive(Clone)]
struct GenerationRecord {
    inner: core_harness::GenerationRecord,
}

#[pymethods]
impl GenerationRecord {
    #[getter]
    fn query_id(&self) -> String {
        self.inner.query_id.clone()
    }

    #[getter]
    fn model(&self) -> String {
        self.inner.model.clone()
    }

    #[getter]
    fn success(&self) -> bool {
        self.inner.success
    }

    /// `(sql, error)` per attempt; `error` is `None` for the accepted one.
    #[getter]
    fn attempts(&self) -> Vec<(String, Option<String>)> {
        self.inner.attempts.iter().map(|a| (a.sql.clone(), a.error.clone())).collect()
    }

    #[getter]
    fn final_sql(&self) -> Option<String> {
        self.inner.final_sql.clone()
    }

    #[getter]
    fn failure(&self) -> Option<String> {
        self.inner.failure.clone()
    }

    fn to_json(&self) -> String {
        self.inner.to_json_pretty()
    }

    fn __repr__(&self) -> String {
        format!(
            "GenerationRecord({:?}, success={}, attempts={})",
            self.inner.query_id,
            self.inner.success,
            self.inner.attempts.len()
        )
    }
}

/// Ask `llm` for SQL answering `question`, check it with `validator` and
/// send repair prompts until it is accepted or `max_retries` repairs fail.
#[pyfunction]
#[pyo3(signature = (llm, validator, query_id, ddl, question, model="model", max_retries=3))]
#[allow(clippy::too_many_arguments)]
fn generate(
    py: Python<'_>,
    llm: Py<PyAny>,
    validator: Py<PyAny>,
    query_id: &str,
    ddl: &str,
    question: &str,
    model: &str,
    max_retries: usize,
) -> PyResult<GenerationRecord> {
    let prompts = core_harness::build_prompts(ddl, question).map_err(value_error)?;
    let llm = PyLlm { model: model.to_string(), func: llm };
    let validator = PyValidator { func: validator };
    let record = py.detach(|| {
        core_harness::generate_with_retry(&llm, &validator, query_id, &prompts, max_retries, Sampling::default())
    });
    Ok(GenerationRecord { inner: record })
}

/// Model → "N out of M".
#[pyfunction]
fn success_table(records: Vec<GenerationRecord>) -> BTreeMap<String, String> {
    let records: Vec<_> = records.into_iter().map(|r| r.inner).collect();
    core_harness::success_table(&records).rows.into_iter().map(|(m, c)| (m, c.to_string())).collect()
}

#[pymodule]
fn sqlscope(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SqlParseError", m.py().get_type::<SqlParseError>())?;
    m.add("ResolutionError", m.py().get_type::<ResolutionError>())?;
    m.add("FEATURES", Feature::ALL.iter().map(|f| f.name()).collect::<Vec<_>>())?;
    m.add("METRICS", Metric::ALL.iter().map(|f| f.name()).collect::<Vec<_>>())?;
    m.add_class::<Catalog>()?;
    m.add_class::<Query>()?;
    m.add_class::<CorpusStats>()?;
    m.add_class::<GenerationRecord>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(split_statements, m)?)?;
    m.add_function(wrap_pyfunction!(jaccard, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_stats, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_means, m)?)?;
    m.add_function(wrap_pyfunction!(build_prompts, m)?)?;
    m.add_function(wrap_pyfunction!(build_repair_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(extract_sql, m)?)?;
    m.add_function(wrap_pyfunction!(validate_sqlite, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(success_table, m)?)?;
    Ok(())
}
