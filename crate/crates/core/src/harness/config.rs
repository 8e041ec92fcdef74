use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::llm::{HttpChatClient, LlmError, API_KEY_ENV};
use super::validate::{PsqlValidator, SqliteValidator, ValidationMode, Validator, ValidatorError};
use super::{Sampling, DEFAULT_MAX_RETRIES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    #[default]
    Sqlite,
    Postgres,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub kind: EngineKind,
    /// SQLite: `:memory:` (schema from the DDL file) or a database path.
    /// PostgreSQL: a libpq connection string.
    pub connection: String,
    pub plan_only: bool,
    pub row_limit: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { kind: EngineKind::Sqlite, connection: ":memory:".into(), plan_only: false, row_limit: 100 }
    }
}

impl EngineConfig {
    pub fn mode(&self) -> ValidationMode {
        if self.plan_only {
            ValidationMode::Plan
        } else {
            ValidationMode::Execute { row_limit: self.row_limit }
        }
    }

    pub fn validator(&self, ddl: &str) -> Result<Box<dyn Validator>, ValidatorError> {
        Ok(match self.kind {
            EngineKind::Sqlite if self.connection == ":memory:" => {
                Box::new(SqliteValidator::in_memory(ddl, self.mode())?)
            }
            EngineKind::Sqlite => Box::new(SqliteValidator::open(&self.connection, self.mode())?),
            EngineKind::Postgres => Box::new(PsqlValidator::new(&self.connection, self.mode())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub timeout_secs: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: "http://localhost:8000/v1/chat/completions".into(),
            model: "default".into(),
            api_key_env: API_KEY_ENV.into(),
            timeout_secs: 120,
        }
    }
}

impl LlmConfig {
    pub fn client(&self) -> Result<HttpChatClient, LlmError> {
        HttpChatClient::new(&self.endpoint, &self.model, &self.api_key_env, Duration::from_secs(self.timeout_secs))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub max_retries: usize,
    pub parallelism: usize,
    pub engine: EngineConfig,
    pub llm: LlmConfig,
    pub sampling: Sampling,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            max_retries: DEFAULT_MAX_RETRIES,
            parallelism: 4,
            engine: EngineConfig::default(),
            llm: LlmConfig::default(),
            sampling: Sampling::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: toml::de::Error },
}

impl HarnessConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let p = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: p.clone(), source })?;
        Self::from_toml(&text).map_err(|source| ConfigError::Parse { path: p, source })
    }
}
