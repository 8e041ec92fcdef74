//! LLM text-to-SQL generation with validator-driven repair.

mod config;
mod llm;
mod prompt;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use config::{ConfigError, EngineConfig, EngineKind, HarnessConfig, LlmConfig};
pub use llm::{extract_sql, ChatMessage, HttpChatClient, LlmClient, LlmError, ScriptedLlm, API_KEY_ENV};
pub use prompt::{
    build_prompts, build_repair_prompt, fill, PromptBundle, PromptError, REPAIR_TEMPLATE, SYSTEM_TEMPLATE,
    USER_TEMPLATE,
};
pub use validate::{
    PsqlValidator, ScriptedValidator, SqliteValidator, ValidationMode, Validator, ValidatorError, Verdict,
};

pub const DEFAULT_MAX_RETRIES: usize = 3;
pub const RETRY_CONVENTION: &str = "1 initial attempt + max_retries repair attempts";

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub temperature: Option<f64>,
    pub top_p: Option<f64>,
    pub max_tokens: Option<u32>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub sql: String,
    /// Validator error text; `None` when the statement was accepted.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub query_id: String,
    pub model: String,
    pub attempts: Vec<Attempt>,
    pub success: bool,
    pub final_sql: Option<String>,
    /// Non-retryable failure (LLM or validator unavailable).
    pub failure: Option<String>,
    pub max_retries: usize,
    pub retry_convention: String,
    pub sampling: Sampling,
    pub transcript: Vec<ChatMessage>,
}

impl GenerationRecord {
    /// Success as re-derived from the attempts alone.
    pub fn derived_success(&self) -> bool {
        self.failure.is_none() && self.attempts.last().is_some_and(|a| a.error.is_none())
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }
}

/// Attempt 1 uses `prompts`; every rejected attempt is followed, in the same
/// conversation, by the model's reply and a repair prompt, until the
/// validator accepts or `max_retries` repairs have been spent.
pub fn generate_with_retry(
    llm: &dyn LlmClient,
    validator: &dyn Validator,
    query_id: &str,
    prompts: &PromptBundle,
    max_retries: usize,
    sampling: Sampling,
) -> GenerationRecord {
    let mut record = GenerationRecord {
        query_id: query_id.to_string(),
        model: llm.model().to_string(),
        attempts: Vec::new(),
        success: false,
        final_sql: None,
        failure: None,
        max_retries,
        retry_convention: RETRY_CONVENTION.to_string(),
        sampling,
        transcript: vec![ChatMessage::system(&prompts.system), ChatMessage::user(&prompts.user)],
    };
    for attempt in 0..=max_retries {
        let reply = match llm.complete(&record.transcript, &sampling) {
            Ok(r) => r,
            Err(e) => {
                record.failure = Some(e.to_string());
                break;
            }
        };
        record.transcript.push(ChatMessage::assistant(&reply));
        let sql = extract_sql(&reply);
        let verdict = if sql.is_empty() { Ok(Err("empty statement".to_string())) } else { validator.validate(&sql) };
        match verdict {
            Ok(Ok(())) => {
                record.attempts.push(Attempt { sql: sql.clone(), error: None });
                record.success = true;
                record.final_sql = Some(sql);
                break;
            }
            Ok(Err(message)) => {
                record.attempts.push(Attempt { sql: sql.clone(), error: Some(message.clone()) });
                if attempt < max_retries {
                    let shown = if sql.is_empty() { reply.as_str() } else { sql.as_str() };
                    let repair = fill(REPAIR_TEMPLATE, &[("{{ sql }}", shown), ("{{ error_message }}", &message)]);
                    record.transcript.push(ChatMessage::user(repair));
                }
            }
            Err(e) => {
                let reason = e.to_string();
                record.attempts.push(Attempt { sql, error: Some(reason.clone()) });
                record.failure = Some(reason);
                break;
            }
        }
    }
    record
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationTask {
    pub query_id: String,
    pub question: String,
}

/// Generate for every task with at most `parallelism` records in flight.
/// Output is sorted by query id.
pub fn run_batch(
    llm: &dyn LlmClient,
    validator: &dyn Validator,
    ddl: &str,
    tasks: &[GenerationTask],
    max_retries: usize,
    sampling: Sampling,
    parallelism: usize,
) -> Result<Vec<GenerationRecord>, PromptError> {
    use rayon::prelude::*;
    let prompts = tasks
        .iter()
        .map(|t| build_prompts(ddl, &t.question).map(|p| (t.query_id.as_str(), p)))
        .collect::<Result<Vec<_>, _>>()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(parallelism.max(1)).build().expect("thread pool");
    let mut records: Vec<GenerationRecord> = pool.install(|| {
        prompts.par_iter().map(|(id, p)| generate_with_retry(llm, validator, id, p, max_retries, sampling)).collect()
    });
    records.sort_by(|a, b| a.query_id.cmp(&b.query_id));
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuccessCount {
    pub successes: usize,
    pub total: usize,
}

impl std::fmt::Display for SuccessCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} out of {}", self.successes, self.total)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuccessTable {
    pub rows: BTreeMap<String, SuccessCount>,
}

impl SuccessTable {
    pub fn row(&self, model: &str) -> Option<String> {
        self.rows.get(model).map(|c| c.to_string())
    }

    /// `model,successes,total,summary` sorted by model.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(["model", "successes", "total", "summary"]).expect("in-memory write");
        for (model, c) in &self.rows {
            w.write_record([model.as_str(), &c.successes.to_string(), &c.total.to_string(), &c.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

pub fn success_table(records: &[GenerationRecord]) -> SuccessTable {
    let mut rows: BTreeMap<String, SuccessCount> = BTreeMap::new();
    for r in records {
        let row = rows.entry(r.model.clone()).or_insert(SuccessCount { successes: 0, total: 0 });
        row.total += 1;
        row.successes += usize::from(r.success);
    }
    SuccessTable { rows }
}
