//! Table and column inventory ingested from CREATE TABLE statements.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sqlparser::ast::{ColumnOption, CreateTable, Statement};
use sqlparser::parser::Parser;

use crate::frontend::{Dialect, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("table `{0}` is defined more than once")]
    DuplicateTable(String),
    #[error("table `{0}` has no columns")]
    EmptyTable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    pub data_type: String,
    pub options: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDef {
    pub name: String,
    pub columns: Vec<ColumnDef>,
    pub constraints: Vec<String>,
}

impl TableDef {
    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn has_column(&self, column: &str) -> bool {
        self.columns.iter().any(|c| c.name == column)
    }
}

/// Immutable after ingestion; safe to share across threads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SchemaCatalog {
    tables: BTreeMap<String, TableDef>,
    source_hash: String,
}

impl SchemaCatalog {
    pub fn empty() -> Self {
        SchemaCatalog { tables: BTreeMap::new(), source_hash: hash_text("") }
    }

    /// Build a catalog from a DDL script. Statements other than CREATE TABLE
    /// are skipped.
    pub fn from_ddl(ddl: &str) -> Result<Self, CatalogError> {
        let dialect = Dialect::Generic.parser_dialect();
        let statements = Parser::parse_sql(dialect.as_ref(), ddl)
            .map_err(|e| CatalogError::Syntax(crate::frontend::syntax_error(ddl, &e.to_string())))?;
        let mut tables = BTreeMap::new();
        for stmt in statements {
            let Statement::CreateTable(ct) = stmt else { continue };
            let def = table_def(&ct);
            if def.columns.is_empty() {
                return Err(CatalogError::EmptyTable(def.name));
            }
            if tables.contains_key(&def.name) {
                return Err(CatalogError::DuplicateTable(def.name));
            }
            tables.insert(def.name.clone(), def);
        }
        Ok(SchemaCatalog { tables, source_hash: hash_text(ddl) })
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// SHA-256 of the DDL text, hex encoded.
    pub fn source_hash(&self) -> &str {
        &self.source_hash
    }

    pub fn table(&self, name: &str) -> Option<&TableDef> {
        self.tables.get(name)
    }

    pub fn tables(&self) -> impl Iterator<Item = &TableDef> {
        self.tables.values()
    }

    pub fn table_names(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }

    pub fn has_column(&self, table: &str, column: &str) -> bool {
        self.table(table).is_some_and(|t| t.has_column(column))
    }

    /// Table name to ordered column names.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .tables
            .values()
            .map(|t| (t.name.clone(), t.column_names().map(serde_json::Value::from).collect()))
            .collect();
        serde_json::Value::Object(map)
    }
}

fn hash_text(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn normalize(i: &sqlparser::ast::Ident) -> String {
    crate::frontend::normalize_ident(i).value
}

fn table_def(ct: &CreateTable) -> TableDef {
    let name = ct.name.0.last().and_then(|p| p.as_ident()).map(normalize).unwrap_or_default();
    let columns = ct
        .columns
        .iter()
        .map(|c| ColumnDef {
            name: normalize(&c.name),
            data_type: c.data_type.to_string(),
            options: c
                .options
                .iter()
                .map(|o| match &o.option {
                    ColumnOption::NotNull => "NOT NULL".to_string(),
                    other => other.to_string(),
                })
                .collect(),
        })
        .collect();
    TableDef { name, columns, constraints: ct.constraints.iter().map(|c| c.to_string()).collect() }
}

/// A column rewritten to its physical `table.column` identity.
///
/// Equality, ordering and hashing use only `table` and `column`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CanonicalColumn {
    pub table: String,
    pub column: String,
    pub resolved: bool,
}

impl CanonicalColumn {
    pub fn resolved(table: impl Into<String>, column: impl Into<String>) -> Self {
        CanonicalColumn { table: table.into(), column: column.into(), resolved: true }
    }

    pub fn unresolved(table: impl Into<String>, column: impl Into<String>) -> Self {
        CanonicalColumn { table: table.into(), column: column.into(), resolved: false }
    }
}

impl PartialEq for CanonicalColumn {
    fn eq(&self, other: &Self) -> bool {
        self.table == other.table && self.column == other.column
    }
}

impl Eq for CanonicalColumn {}

impl Hash for CanonicalColumn {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.table.hash(state);
        self.column.hash(state);
    }
}

impl PartialOrd for CanonicalColumn {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CanonicalColumn {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.table, &self.column).cmp(&(&other.table, &other.column))
    }
}

impl fmt::Display for CanonicalColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.table, self.column)
    }
}
