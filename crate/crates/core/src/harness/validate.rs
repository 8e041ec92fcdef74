use std::collections::VecDeque;
use std::path::PathBuf;
use std::process::Command;
use std::sync::Mutex;

use rusqlite::{Connection, OpenFlags};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidatorError {
    #[error("validator unavailable: {0}")]
    Unavailable(String),
}

/// Engine verdict: `Ok(())` or the engine's error text, verbatim.
pub type Verdict = Result<(), String>;

pub trait Validator: Send + Sync {
    fn validate(&self, sql: &str) -> Result<Verdict, ValidatorError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum ValidationMode {
    /// Run the statement and fetch up to `row_limit` rows.
    Execute { row_limit: usize },
    /// Prepare/plan the statement without running it.
    Plan,
}

impl Default for ValidationMode {
    fn default() -> Self {
        ValidationMode::Execute { row_limit: 100 }
    }
}

enum SqliteSource {
    Ddl(String),
    File(PathBuf),
}

/// SQLite engine, read-only, with a small pool of connections.
pub struct SqliteValidator {
    source: SqliteSource,
    mode: ValidationMode,
    pool: Mutex<Vec<Connection>>,
}

impl SqliteValidator {
    /// In-memory database built from `ddl`.
    pub fn in_memory(ddl: &str, mode: ValidationMode) -> Result<Self, ValidatorError> {
        let v = SqliteValidator { source: SqliteSource::Ddl(ddl.to_string()), mode, pool: Mutex::default() };
        let conn = v.connect()?;
        v.pool.lock().expect("lock").push(conn);
        Ok(v)
    }

    /// Existing database file, opened read-only.
    pub fn open(path: impl Into<PathBuf>, mode: ValidationMode) -> Result<Self, ValidatorError> {
        let v = SqliteValidator { source: SqliteSource::File(path.into()), mode, pool: Mutex::default() };
        let conn = v.connect()?;
        v.pool.lock().expect("lock").push(conn);
        Ok(v)
    }

    fn connect(&self) -> Result<Connection, ValidatorError> {
        let unavailable = |e: rusqlite::Error| ValidatorError::Unavailable(e.to_string());
        let conn = match &self.source {
            SqliteSource::Ddl(ddl) => {
                let c = Connection::open_in_memory().map_err(unavailable)?;
                c.execute_batch(ddl).map_err(unavailable)?;
                c
            }
            SqliteSource::File(p) => {
                Connection::open_with_flags(p, OpenFlags::SQLITE_OPEN_READ_ONLY).map_err(unavailable)?
            }
        };
        conn.execute_batch("PRAGMA query_only = ON").map_err(unavailable)?;
        Ok(conn)
    }

    fn check(&self, conn: &Connection, sql: &str) -> Verdict {
        let mut stmt = conn.prepare(sql).map_err(engine_message)?;
        if let ValidationMode::Execute { row_limit } = self.mode {
            let mut rows = stmt.query([]).map_err(engine_message)?;
            for _ in 0..row_limit {
                if rows.next().map_err(engine_message)?.is_none() {
                    break;
                }
            }
        }
        Ok(())
    }
}

fn engine_message(e: rusqlite::Error) -> String {
    match e {
        rusqlite::Error::SqliteFailure(_, Some(msg)) => msg,
        rusqlite::Error::SqlInputError { msg, .. } => msg,
        other => other.to_string(),
    }
}

impl Validator for SqliteValidator {
    fn validate(&self, sql: &str) -> Result<Verdict, ValidatorError> {
        let pooled = self.pool.lock().expect("lock").pop();
        let conn = match pooled {
            Some(c) => c,
            None => self.connect()?,
        };
        let verdict = self.check(&conn, sql);
        self.pool.lock().expect("lock").push(conn);
        Ok(verdict)
    }
}

/// PostgreSQL through the `psql` client. Each call is its own session; the
/// statement runs inside a transaction that is always rolled back.
pub struct PsqlValidator {
    pub program: String,
    pub connection: String,
    pub mode: ValidationMode,
}

impl PsqlValidator {
    pub fn new(connection: &str, mode: ValidationMode) -> Self {
        PsqlValidator { program: "psql".into(), connection: connection.into(), mode }
    }

    fn commands(&self, sql: &str) -> Vec<String> {
        match self.mode {
            ValidationMode::Plan => vec![format!("EXPLAIN {sql}")],
            ValidationMode::Execute { row_limit } => vec![
                "BEGIN READ ONLY".into(),
                format!("DECLARE sqlscope_cursor NO SCROLL CURSOR FOR {sql}"),
                format!("FETCH {row_limit} FROM sqlscope_cursor"),
                "ROLLBACK".into(),
            ],
        }
    }
}

impl Validator for PsqlValidator {
    fn validate(&self, sql: &str) -> Result<Verdict, ValidatorError> {
        let mut cmd = Command::new(&self.program);
        cmd.args(["-X", "-q", "-v", "ON_ERROR_STOP=1", "-d", &self.connection]);
        for c in self.commands(sql) {
            cmd.arg("-c").arg(c);
        }
        let out = cmd.output().map_err(|e| ValidatorError::Unavailable(format!("{}: {e}", self.program)))?;
        if out.status.success() {
            return Ok(Ok(()));
        }
        let stderr = String::from_utf8_lossy(&out.stderr).trim_end().to_string();
        if stderr.starts_with("psql: error: connection") || stderr.contains("could not connect") {
            return Err(ValidatorError::Unavailable(stderr));
        }
        Ok(Err(stderr))
    }
}

/// Replays canned verdicts in order.
pub struct ScriptedValidator {
    verdicts: Mutex<VecDeque<Result<Verdict, ValidatorError>>>,
    seen: Mutex<Vec<String>>,
}

impl ScriptedValidator {
    pub fn new(verdicts: impl IntoIterator<Item = Verdict>) -> Self {
        Self::with_results(verdicts.into_iter().map(Ok))
    }

    pub fn with_results(verdicts: impl IntoIterator<Item = Result<Verdict, ValidatorError>>) -> Self {
        ScriptedValidator { verdicts: Mutex::new(verdicts.into_iter().collect()), seen: Mutex::default() }
    }

    pub fn seen(&self) -> Vec<String> {
        self.seen.lock().expect("lock").clone()
    }
}

impl Validator for ScriptedValidator {
    fn validate(&self, sql: &str) -> Result<Verdict, ValidatorError> {
        self.seen.lock().expect("lock").push(sql.to_string());
        self.verdicts
            .lock()
            .expect("lock")
            .pop_front()
            .unwrap_or_else(|| Err(ValidatorError::Unavailable("script exhausted".into())))
    }
}
