use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::Sampling;

pub const API_KEY_ENV: &str = "SQLSCOPE_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: "assistant".into(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlmError {
    #[error("LLM unavailable: {0}")]
    Unavailable(String),
}

pub trait LlmClient: Send + Sync {
    fn model(&self) -> &str;
    fn complete(&self, messages: &[ChatMessage], sampling: &Sampling) -> Result<String, LlmError>;
}

/// OpenAI-style `chat/completions` endpoint.
pub struct HttpChatClient {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpChatClient {
    /// The key is read from `key_env` when set; local servers often need none.
    pub fn new(endpoint: &str, model: &str, key_env: &str, timeout: Duration) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| LlmError::Unavailable(e.to_string()))?;
        Ok(HttpChatClient {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            api_key: std::env::var(key_env).ok().filter(|k| !k.is_empty()),
            client,
        })
    }

    fn body(&self, messages: &[ChatMessage], sampling: &Sampling) -> serde_json::Value {
        let mut body = serde_json::json!({ "model": self.model, "messages": messages });
        let obj = body.as_object_mut().expect("object");
        if let Some(t) = sampling.temperature {
            obj.insert("temperature".into(), t.into());
        }
        if let Some(p) = sampling.top_p {
            obj.insert("top_p".into(), p.into());
        }
        if let Some(n) = sampling.max_tokens {
            obj.insert("max_tokens".into(), n.into());
        }
        if let Some(s) = sampling.seed {
            obj.insert("seed".into(), s.into());
        }
        body
    }
}

impl LlmClient for HttpChatClient {
    fn model(&self) -> &str {
        &self.model
    }

    fn complete(&self, messages: &[ChatMessage], sampling: &Sampling) -> Result<String, LlmError> {
        let mut req = self.client.post(&self.endpoint).json(&self.body(messages, sampling));
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| LlmError::Unavailable(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| LlmError::Unavailable(e.to_string()))?;
        if !status.is_success() {
            return Err(LlmError::Unavailable(format!("HTTP {status}: {text}")));
        }
        let json: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| LlmError::Unavailable(format!("bad response body: {e}")))?;
        json.pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .map(str::to_string)
            .ok_or_else(|| LlmError::Unavailable("response has no choices[0].message.content".into()))
    }
}

/// Replays canned replies in order and records every conversation it saw.
pub struct ScriptedLlm {
    model: String,
    replies: Mutex<VecDeque<Result<String, LlmError>>>,
    calls: Mutex<Vec<Vec<ChatMessage>>>,
}

impl ScriptedLlm {
    pub fn new<S: Into<String>>(model: &str, replies: impl IntoIterator<Item = S>) -> Self {
        Self::with_results(model, replies.into_iter().map(|r| Ok(r.into())))
    }

    pub fn with_results(model: &str, replies: impl IntoIterator<Item = Result<String, LlmError>>) -> Self {
        ScriptedLlm { model: model.into(), replies: Mutex::new(replies.into_iter().collect()), calls: Mutex::default() }
    }

    pub fn calls(&self) -> Vec<Vec<ChatMessage>> {
        self.calls.lock().expect("lock").clone()
    }
}

impl LlmClient for ScriptedLlm {
    fn model(&self) -> &str {
        &self.model
    }

    fn complete(&self, messages: &[ChatMessage], _sampling: &Sampling) -> Result<String, LlmError> {
        self.calls.lock().expect("lock").push(messages.to_vec());
        self.replies
            .lock()
            .expect("lock")
            .pop_front()
            .unwrap_or_else(|| Err(LlmError::Unavailable("script exhausted".into())))
    }
}

/// SQL from a model reply: the first fenced code block if there is one,
/// otherwise the whole reply, trimmed and without a trailing semicolon.
pub fn extract_sql(reply: &str) -> String {
    let body = match reply.find("```") {
        Some(start) => {
            let after = &reply[start + 3..];
            let after = after.find('\n').map_or(after, |nl| {
                let tag = &after[..nl];
                if tag.trim().chars().all(|c| c.is_ascii_alphanumeric()) {
                    &after[nl + 1..]
                } else {
                    after
                }
            });
            after.find("```").map_or(after, |end| &after[..end])
        }
        None => reply,
    };
    body.trim().trim_end_matches(';').trim_end().to_string()
}
