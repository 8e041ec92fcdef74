use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use sqlscope::{split_statements, Dialect, SchemaCatalog};

use crate::output::{CliError, Outcome, Severity};

pub const SCHEMA_FILE: &str = "schema.sql";

#[derive(Debug, Clone)]
pub struct Query {
    pub id: String,
    pub sql: String,
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn load_catalog(ddl: Option<&Path>) -> Result<SchemaCatalog, CliError> {
    match ddl {
        Some(p) => {
            SchemaCatalog::from_ddl(&read_text(p)?).map_err(|e| CliError::Fatal(format!("{}: {e}", p.display())))
        }
        None => Ok(SchemaCatalog::empty()),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

/// `.sql` files of a directory in name order, without its schema file.
fn sql_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "sql"))
        .filter(|p| p.file_name().is_none_or(|n| n != SCHEMA_FILE))
        .collect();
    files.sort();
    Ok(files)
}

/// Statements of one file. A single statement takes the file stem as id;
/// several are numbered `stem#1`, `stem#2`, ...
fn file_queries(path: &Path, id: Option<&str>, dialect: Dialect, outcome: &mut Outcome) -> Vec<Query> {
    let base = id.map(str::to_string).unwrap_or_else(|| stem(path));
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            outcome.report(Severity::Failure, &path.display().to_string(), &e.to_string());
            return Vec::new();
        }
    };
    match split_statements(&text, dialect) {
        Ok(stmts) if stmts.len() == 1 => vec![Query { id: base, sql: stmts[0].text.clone() }],
        Ok(stmts) => {
            stmts.into_iter().enumerate().map(|(i, s)| Query { id: format!("{base}#{}", i + 1), sql: s.text }).collect()
        }
        Err(e) => {
            outcome.report(Severity::Parse, &base, &format!("{}: {e}", path.display()));
            Vec::new()
        }
    }
}

pub fn path_queries(paths: &[PathBuf], dialect: Dialect, outcome: &mut Outcome) -> Result<Vec<Query>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            for f in sql_files(p)? {
                out.extend(file_queries(&f, None, dialect, outcome));
            }
        } else {
            out.extend(file_queries(p, None, dialect, outcome));
        }
    }
    Ok(out)
}

/// CSV rows keyed by header name. Relative paths in `path_columns` are
/// taken relative to the manifest's directory.
pub fn read_manifest(
    path: &Path,
    required: &[&str],
    path_columns: &[&str],
) -> Result<Vec<BTreeMap<String, String>>, CliError> {
    let bad = |msg: String| CliError::Fatal(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers: Vec<String> = reader.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
    for col in required {
        if !headers.iter().any(|h| h == col) {
            return Err(bad(format!("missing column `{col}`")));
        }
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut rows = Vec::new();
    let mut ids = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let mut row: BTreeMap<String, String> =
            headers.iter().cloned().zip(record.iter().map(str::to_string)).collect();
        for col in path_columns {
            if let Some(v) = row.get_mut(*col) {
                let p = Path::new(v.as_str());
                if p.is_relative() {
                    *v = base.join(p).display().to_string();
                }
            }
        }
        let id = row.get("query_id").cloned().unwrap_or_default();
        let scope = row.get("corpus").cloned().unwrap_or_default();
        if !ids.insert((scope, id.clone())) {
            return Err(bad(format!("duplicate query_id `{id}`")));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn manifest_queries(
    path: &Path,
    dialect: Dialect,
    outcome: &mut Outcome,
) -> Result<Vec<(String, Query)>, CliError> {
    let default_corpus = stem(path);
    let mut out = Vec::new();
    for row in read_manifest(path, &["query_id", "path"], &["path"])? {
        let corpus = row.get("corpus").filter(|c| !c.is_empty()).cloned().unwrap_or_else(|| default_corpus.clone());
        for q in file_queries(Path::new(&row["path"]), Some(&row["query_id"]), dialect, outcome) {
            out.push((corpus.clone(), q));
        }
    }
    Ok(out)
}

pub fn ensure_unique(queries: &[Query]) -> Result<(), CliError> {
    let mut seen = BTreeSet::new();
    for q in queries {
        if !seen.insert(q.id.as_str()) {
            return Err(CliError::Fatal(format!("duplicate query id `{}`", q.id)));
        }
    }
    Ok(())
}

pub struct Corpus {
    pub name: String,
    pub catalog: SchemaCatalog,
    pub queries: Vec<Query>,
}

/// Corpora from positional inputs and a manifest. A directory input uses
/// its own schema file when present, otherwise `--ddl`.
pub fn corpora(
    inputs: &[PathBuf],
    manifest: Option<&Path>,
    ddl: Option<&Path>,
    dialect: Dialect,
    outcome: &mut Outcome,
) -> Result<Vec<Corpus>, CliError> {
    if inputs.is_empty() && manifest.is_none() {
        return Err(CliError::Usage("give at least one corpus directory, .sql file or --manifest".into()));
    }
    let shared = load_catalog(ddl)?;
    let mut out: BTreeMap<String, Corpus> = BTreeMap::new();
    for p in inputs {
        let name = if p.is_dir() {
            p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string())
        } else {
            stem(p)
        };
        let own_schema = p.join(SCHEMA_FILE);
        let catalog =
            if p.is_dir() && own_schema.is_file() { load_catalog(Some(&own_schema))? } else { shared.clone() };
        let queries = path_queries(std::slice::from_ref(p), dialect, outcome)?;
        if out.contains_key(&name) {
            return Err(CliError::Usage(format!("corpus name `{name}` given twice")));
        }
        out.insert(name.clone(), Corpus { name, catalog, queries });
    }
    if let Some(m) = manifest {
        for (corpus, q) in manifest_queries(m, dialect, outcome)? {
            out.entry(corpus.clone())
                .or_insert_with(|| Corpus { name: corpus, catalog: shared.clone(), queries: Vec::new() })
                .queries
                .push(q);
        }
    }
    for c in out.values() {
        ensure_unique(&c.queries)?;
    }
    Ok(out.into_values().collect())
}
