use std::path::{Path, PathBuf};

use sqlscope::corpus::{histogram_csv, means_csv, parse_metrics, SkippedQuery};
use sqlscope::harness::{run_batch, success_table, EngineKind, GenerationTask, HarnessConfig};
use sqlscope::similarity::{compare_with, reports_csv, CompareOptions};
use sqlscope::{
    corpus_stats as stats_of, feature_vector_with, normalize_means, parse, resolve, summarize, CorpusError,
    CorpusStats, FailurePolicy, Feature, FeatureOptions, Metric, QueryTree, ResolveMode, SchemaCatalog,
    SimilarityReport,
};

use crate::inputs::{self, Query};
use crate::output::{emit, write_atomic, CliError, Outcome, Severity};
use crate::Common;

fn analyzed(q: &Query, catalog: &SchemaCatalog, common: &Common, outcome: &mut Outcome) -> Option<QueryTree> {
    let tree = match parse(&q.sql, common.dialect) {
        Ok(t) => t,
        Err(e) => {
            outcome.report(Severity::Parse, &q.id, &e.to_string());
            return None;
        }
    };
    match resolve(&tree, catalog, ResolveMode::Lenient) {
        Ok(t) => Some(t),
        Err(e) => {
            outcome.report(Severity::Failure, &q.id, &e.to_string());
            None
        }
    }
}

fn csv_text(rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn analyze(
    inputs: &[PathBuf],
    manifest: Option<&Path>,
    multiset: bool,
    common: &Common,
) -> Result<Outcome, CliError> {
    if inputs.is_empty() && manifest.is_none() {
        return Err(CliError::Usage("give at least one .sql file, directory or --manifest".into()));
    }
    let mut outcome = Outcome::new(common.lenient);
    let catalog = inputs::load_catalog(common.ddl.as_deref())?;
    let mut queries = inputs::path_queries(inputs, common.dialect, &mut outcome)?;
    if let Some(m) = manifest {
        queries.extend(inputs::manifest_queries(m, common.dialect, &mut outcome)?.into_iter().map(|(_, q)| q));
    }
    inputs::ensure_unique(&queries)?;
    queries.sort_by(|a, b| a.id.cmp(&b.id));
    let options = FeatureOptions { multiset };
    let results: Vec<(String, serde_json::Value)> = queries
        .iter()
        .filter_map(|q| {
            analyzed(q, &catalog, common, &mut outcome)
                .map(|t| (q.id.clone(), feature_vector_with(&t, options).to_json()))
        })
        .collect();
    let json = match (queries.len(), results.as_slice()) {
        (1, [(_, v)]) => pretty(v),
        (1, []) => String::new(),
        _ => pretty(
            &results.iter().map(|(id, v)| serde_json::json!({ "query_id": id, "features": v })).collect::<Vec<_>>(),
        ),
    };
    if !json.is_empty() {
        emit(common.out.as_deref(), &[("analyze.json", &json)], &json)?;
    }
    Ok(outcome)
}

pub fn compare(
    generated: Option<&Path>,
    gold: Option<&Path>,
    manifest: Option<&Path>,
    multiset: bool,
    policy: FailurePolicy,
    model: &str,
    common: &Common,
) -> Result<Outcome, CliError> {
    let mut pairs: Vec<(String, PathBuf, PathBuf)> = Vec::new();
    match (generated, gold) {
        (Some(g), Some(r)) => {
            let id = r.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            pairs.push((id, g.to_path_buf(), r.to_path_buf()));
        }
        (Some(_), None) => return Err(CliError::Usage("compare needs both a generated and a gold file".into())),
        _ => {}
    }
    if let Some(m) = manifest {
        for row in
            inputs::read_manifest(m, &["query_id", "generated_path", "gold_path"], &["generated_path", "gold_path"])?
        {
            pairs.push((
                row["query_id"].clone(),
                row["generated_path"].clone().into(),
                row["gold_path"].clone().into(),
            ));
        }
    }
    if pairs.is_empty() {
        return Err(CliError::Usage("give GENERATED GOLD files or --manifest".into()));
    }
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(CliError::Fatal(format!("duplicate query id `{}`", w[0].0)));
    }
    let mut outcome = Outcome::new(common.lenient);
    let catalog = inputs::load_catalog(common.ddl.as_deref())?;
    let options = CompareOptions { features: Feature::ALL.to_vec(), multiset };
    let mut reports = Vec::new();
    for (id, gen_path, gold_path) in &pairs {
        let (gen_text, gold_text) = match (inputs::read_text(gen_path), inputs::read_text(gold_path)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                outcome.report(Severity::Failure, id, &e.to_string());
                continue;
            }
        };
        let gold_query = Query { id: format!("{id} (gold)"), sql: gold_text };
        let Some(gold_tree) = analyzed(&gold_query, &catalog, common, &mut outcome) else { continue };
        let gen_query = Query { id: format!("{id} (generated)"), sql: gen_text };
        match analyzed(&gen_query, &catalog, common, &mut outcome) {
            Some(gen_tree) => reports.push(compare_with(&gen_tree, &gold_tree, &options).with_id(id.clone())),
            None => reports.push(SimilarityReport::failed(id.clone())),
        }
    }
    let summary = match summarize(&reports, model, policy) {
        Ok(s) => Some(s),
        Err(e) => {
            outcome.report(Severity::Failure, model, &e.to_string());
            None
        }
    };
    let table = reports_csv(&reports, summary.as_ref(), &Feature::ALL);
    let mut files = vec![("similarity.csv", table.clone())];
    if let Some(s) = &summary {
        files.push(("summary.json", pretty(s)));
    }
    let refs: Vec<(&str, &str)> = files.iter().map(|(n, c)| (*n, c.as_str())).collect();
    emit(common.out.as_deref(), &refs, &table)?;
    Ok(outcome)
}

fn metric_list(metrics: Option<&str>) -> Result<Vec<Metric>, CliError> {
    match metrics {
        Some(list) => {
            let parsed = parse_metrics(list).map_err(CliError::Usage)?;
            if parsed.is_empty() {
                return Err(CliError::Usage("--metrics names no metric".into()));
            }
            Ok(parsed)
        }
        None => Ok(Metric::ALL.to_vec()),
    }
}

fn statistics(
    inputs: &[PathBuf],
    manifest: Option<&Path>,
    common: &Common,
    outcome: &mut Outcome,
) -> Result<Vec<CorpusStats>, CliError> {
    let corpora = inputs::corpora(inputs, manifest, common.ddl.as_deref(), common.dialect, outcome)?;
    let mut out = Vec::new();
    for corpus in corpora {
        let mut trees = Vec::new();
        let mut skipped = Vec::new();
        for q in &corpus.queries {
            let label = format!("{}/{}", corpus.name, q.id);
            match parse(&q.sql, common.dialect) {
                Ok(t) => match resolve(&t, &corpus.catalog, ResolveMode::Lenient) {
                    Ok(t) => trees.push(t),
                    Err(e) => {
                        outcome.report(Severity::Failure, &label, &e.to_string());
                        skipped.push(SkippedQuery { query_id: q.id.clone(), reason: e.to_string() });
                    }
                },
                Err(e) => {
                    outcome.report(Severity::Parse, &label, &e.to_string());
                    skipped.push(SkippedQuery { query_id: q.id.clone(), reason: e.to_string() });
                }
            }
        }
        out.push(stats_of(&trees, &corpus.name).with_skipped(skipped));
    }
    Ok(out)
}

pub fn corpus_stats(
    inputs: &[PathBuf],
    manifest: Option<&Path>,
    metrics: Option<&str>,
    common: &Common,
) -> Result<Outcome, CliError> {
    let metrics = metric_list(metrics)?;
    let mut outcome = Outcome::new(common.lenient);
    let stats = statistics(inputs, manifest, common, &mut outcome)?;
    let means = means_csv(&stats, &metrics);
    let mut files: Vec<(String, String)> =
        metrics.iter().map(|m| (format!("histogram_{}.csv", m.slug()), histogram_csv(&stats, *m))).collect();
    files.push(("means.csv".into(), means.clone()));
    let mut skipped = vec![vec!["corpus".to_string(), "query_id".into(), "reason".into()]];
    for s in &stats {
        skipped.extend(s.skipped.iter().map(|k| vec![s.corpus.clone(), k.query_id.clone(), k.reason.clone()]));
    }
    files.push(("skipped.csv".into(), csv_text(skipped)));
    let refs: Vec<(&str, &str)> = files.iter().map(|(n, c)| (n.as_str(), c.as_str())).collect();
    emit(common.out.as_deref(), &refs, &means)?;
    Ok(outcome)
}

pub fn radar(
    inputs: &[PathBuf],
    manifest: Option<&Path>,
    metrics: Option<&str>,
    baseline: &str,
    format: &str,
    common: &Common,
) -> Result<Outcome, CliError> {
    if format != "csv" && format != "json" {
        return Err(CliError::Usage(format!("unknown format `{format}` (expected csv or json)")));
    }
    let metrics = metric_list(metrics)?;
    let mut outcome = Outcome::new(common.lenient);
    let stats = statistics(inputs, manifest, common, &mut outcome)?;
    let normalized = normalize_means(&stats, baseline, &metrics).map_err(|e| match e {
        CorpusError::MissingBaseline(_) => CliError::Usage(e.to_string()),
        other => CliError::Fatal(other.to_string()),
    })?;
    for d in &normalized.dropped {
        eprintln!("warning: baseline `{baseline}` has zero mean for {}; metric dropped", d.metric);
    }
    let table = normalized.to_csv();
    let json = pretty(&normalized.to_json());
    let primary = if format == "json" { json.clone() } else { table.clone() };
    emit(common.out.as_deref(), &[("radar.csv", &table), ("radar.json", &json)], &primary)?;
    Ok(outcome)
}

fn file_safe(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.#".contains(c) { c } else { '_' }).collect()
}

fn load_config(path: Option<&Path>) -> Result<HarnessConfig, CliError> {
    match path {
        Some(p) => HarnessConfig::load(p).map_err(|e| CliError::Fatal(e.to_string())),
        None => Ok(HarnessConfig::default()),
    }
}

pub fn generate(
    manifest: &Path,
    config: Option<&Path>,
    max_retries: Option<usize>,
    common: &Common,
) -> Result<Outcome, CliError> {
    let mut config = load_config(config)?;
    if let Some(n) = max_retries {
        config.max_retries = n;
    }
    let ddl_path = common.ddl.as_deref().ok_or_else(|| CliError::Usage("generate needs --ddl".into()))?;
    let out = common.out.as_deref().ok_or_else(|| CliError::Usage("generate needs --out".into()))?;
    let ddl = inputs::read_text(ddl_path)?;
    let mut tasks: Vec<GenerationTask> = inputs::read_manifest(manifest, &["query_id", "question"], &[])?
        .into_iter()
        .map(|row| GenerationTask { query_id: row["query_id"].clone(), question: row["question"].clone() })
        .collect();
    tasks.sort_by(|a, b| a.query_id.cmp(&b.query_id));
    let validator = config.engine.validator(&ddl).map_err(|e| CliError::Fatal(e.to_string()))?;
    let llm = config.llm.client().map_err(|e| CliError::Fatal(e.to_string()))?;
    let records =
        run_batch(&llm, validator.as_ref(), &ddl, &tasks, config.max_retries, config.sampling, config.parallelism)
            .map_err(|e| CliError::Fatal(format!("{}: {e}", manifest.display())))?;
    let mut outcome = Outcome::new(common.lenient);
    for r in &records {
        write_atomic(
            &out.join("records").join(format!("{}.json", file_safe(&r.query_id))),
            r.to_json_pretty().as_bytes(),
        )?;
        if let Some(reason) = &r.failure {
            outcome.report(Severity::Failure, &r.query_id, reason);
        }
    }
    let table = success_table(&records);
    write_atomic(&out.join("success.csv"), table.to_csv().as_bytes())?;
    for (model, row) in &table.rows {
        eprintln!("{model}: {row}");
    }
    Ok(outcome)
}

pub fn validate(
    inputs: &[PathBuf],
    manifest: Option<&Path>,
    config: Option<&Path>,
    common: &Common,
) -> Result<Outcome, CliError> {
    let config = load_config(config)?;
    let ddl = match common.ddl.as_deref() {
        Some(p) => inputs::read_text(p)?,
        None if config.engine.kind == EngineKind::Sqlite && config.engine.connection == ":memory:" => {
            return Err(CliError::Usage("the in-memory SQLite engine needs --ddl".into()))
        }
        None => String::new(),
    };
    if inputs.is_empty() && manifest.is_none() {
        return Err(CliError::Usage("give at least one .sql file, directory or --manifest".into()));
    }
    let mut outcome = Outcome::new(common.lenient);
    let mut queries = inputs::path_queries(inputs, common.dialect, &mut outcome)?;
    if let Some(m) = manifest {
        queries.extend(inputs::manifest_queries(m, common.dialect, &mut outcome)?.into_iter().map(|(_, q)| q));
    }
    inputs::ensure_unique(&queries)?;
    queries.sort_by(|a, b| a.id.cmp(&b.id));
    let validator = config.engine.validator(&ddl).map_err(|e| CliError::Fatal(e.to_string()))?;
    let mut rows = vec![vec!["query_id".to_string(), "valid".into(), "error".into()]];
    for q in &queries {
        match validator.validate(&q.sql).map_err(|e| CliError::Fatal(e.to_string()))? {
            Ok(()) => rows.push(vec![q.id.clone(), "true".into(), String::new()]),
            Err(msg) => {
                outcome.report(Severity::Failure, &q.id, &msg);
                rows.push(vec![q.id.clone(), "false".into(), msg]);
            }
        }
    }
    let table = csv_text(rows);
    emit(common.out.as_deref(), &[("validation.csv", &table)], &table)?;
    Ok(outcome)
}
