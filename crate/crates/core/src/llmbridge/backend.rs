// SPDX-License-Identifier: Apache-2.0

//! Chat-completion endpoint abstraction and its HTTP implementation.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub const ENV_URL: &str = "LINGPAT_LLM_URL";
pub const ENV_KEY: &str = "LINGPAT_LLM_KEY";
pub const ENV_MODEL: &str = "LINGPAT_LLM_MODEL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointConfig {
    pub url: String,
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    pub model: String,
    pub timeout_secs: u64,
    /// Total attempts per request, including the first.
    pub attempts: u32,
    /// Delay before the first retry; doubled for each further retry.
    pub backoff_ms: u64,
    pub max_in_flight: usize,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            url: "http://127.0.0.1:8000/v1/chat/completions".into(),
            api_key: None,
            model: "gpt-4o".into(),
            timeout_secs: 60,
            attempts: 3,
            backoff_ms: 500,
            max_in_flight: 4,
        }
    }
}

impl EndpointConfig {
    /// Overlay `LINGPAT_LLM_URL`, `LINGPAT_LLM_KEY` and `LINGPAT_LLM_MODEL`.
    pub fn with_env(mut self) -> EndpointConfig {
        if let Ok(v) = std::env::var(ENV_URL) {
            self.url = v;
        }
        if let Ok(v) = std::env::var(ENV_KEY) {
            self.api_key = Some(v);
        }
        if let Ok(v) = std::env::var(ENV_MODEL) {
            self.model = v;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BackendError {
    #[error("endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("rate limited")]
    RateLimited,
    #[error("endpoint returned status {0}")]
    Status(u16),
    #[error("malformed endpoint response: {0}")]
    Malformed(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::Unreachable(_) | BackendError::RateLimited => true,
            BackendError::Status(s) => *s >= 500,
            BackendError::Malformed(_) => false,
        }
    }
}

pub trait LlmBackend: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<Completion, BackendError>;
}

/// OpenAI-style chat-completion client at temperature 0.
pub struct HttpBackend {
    agent: ureq::Agent,
    config: EndpointConfig,
}

impl HttpBackend {
    pub fn new(config: EndpointConfig) -> HttpBackend {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        HttpBackend { agent, config }
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }
}

pub(crate) fn parse_completion(body: &Value) -> Result<Completion, BackendError> {
    let text = body
        .pointer("/choices/0/message/content")
        .or_else(|| body.pointer("/choices/0/text"))
        .and_then(Value::as_str)
        .ok_or_else(|| BackendError::Malformed("no choices[0].message.content".into()))?;
    Ok(Completion {
        text: text.to_string(),
        prompt_tokens: body.pointer("/usage/prompt_tokens").and_then(Value::as_u64),
        completion_tokens: body.pointer("/usage/completion_tokens").and_then(Value::as_u64),
    })
}

impl LlmBackend for HttpBackend {
    fn complete(&self, prompt: &str) -> Result<Completion, BackendError> {
        let payload = json!({
            "model": self.config.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut req = self.agent.post(&self.config.url).header("Content-Type", "application/json");
        if let Some(key) = &self.config.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = match req.send_json(&payload) {
            Ok(r) => r,
            Err(ureq::Error::StatusCode(429)) => return Err(BackendError::RateLimited),
            Err(ureq::Error::StatusCode(s)) => return Err(BackendError::Status(s)),
            Err(e) => return Err(BackendError::Unreachable(e.to_string())),
        };
        let body: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::Malformed(e.to_string()))?;
        parse_completion(&body)
    }
}
