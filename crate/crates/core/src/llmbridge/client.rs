// SPDX-License-Identifier: Apache-2.0

//! Querying with retries, transcript recording and replay.

use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::backend::{BackendError, EndpointConfig, LlmBackend};
use super::prompt::{estimate_tokens, PromptBundle};
use super::transcript::{prompt_hash, Transcript, TranscriptRecord};
use super::verdict::{parse_verdict, Verdict};
use super::LlmError;
use crate::patterns::{Adjudicator, AdjudicatorError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryMode {
    /// Always call the endpoint and record the exchange.
    Live,
    /// Answer only from the transcript.
    Replay,
    /// Use the transcript when it has the prompt, otherwise go live.
    ReplayOrLive,
}

impl FromStr for QueryMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(QueryMode::Live),
            "replay" => Ok(QueryMode::Replay),
            "replay-or-live" => Ok(QueryMode::ReplayOrLive),
            other => Err(format!("unknown query mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub raw: String,
    pub verdict: Verdict,
    pub latency_ms: u64,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
    pub replayed: bool,
}

pub struct LlmClient {
    backend: Option<Box<dyn LlmBackend>>,
    transcript: Transcript,
    mode: QueryMode,
    attempts: u32,
    backoff: Duration,
    max_in_flight: usize,
    max_prompt_tokens: Option<usize>,
}

impl LlmClient {
    pub fn new(backend: Box<dyn LlmBackend>, transcript: Transcript, mode: QueryMode, config: &EndpointConfig) -> LlmClient {
        LlmClient {
            backend: Some(backend),
            transcript,
            mode,
            attempts: config.attempts.max(1),
            backoff: Duration::from_millis(config.backoff_ms),
            max_in_flight: config.max_in_flight.max(1),
            max_prompt_tokens: None,
        }
    }

    /// Client that never touches the network.
    pub fn replay(transcript: Transcript) -> LlmClient {
        LlmClient {
            backend: None,
            transcript,
            mode: QueryMode::Replay,
            attempts: 1,
            backoff: Duration::ZERO,
            max_in_flight: 1,
            max_prompt_tokens: None,
        }
    }

    /// Reject prompts estimated above `limit` tokens before any lookup or call.
    pub fn with_prompt_budget(mut self, limit: usize) -> LlmClient {
        self.max_prompt_tokens = Some(limit);
        self
    }

    pub fn mode(&self) -> QueryMode {
        self.mode
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn query(&self, bundle: &PromptBundle) -> Result<LlmResponse, LlmError> {
        self.complete_raw(&bundle.rendered)
    }

    /// Send a prompt verbatim.
    pub fn complete_raw(&self, prompt: &str) -> Result<LlmResponse, LlmError> {
        if let Some(limit) = self.max_prompt_tokens {
            let estimated = estimate_tokens(prompt);
            if estimated > limit {
                return Err(LlmError::PromptTooLong { estimated, limit });
            }
        }
        let hash = prompt_hash(prompt);
        if self.mode != QueryMode::Live {
            if let Some(rec) = self.transcript.lookup(&hash) {
                return Ok(LlmResponse {
                    verdict: parse_verdict(&rec.raw_response),
                    raw: rec.raw_response,
                    latency_ms: 0,
                    prompt_tokens: None,
                    completion_tokens: None,
                    replayed: true,
                });
            }
            if self.mode == QueryMode::Replay {
                return Err(LlmError::TranscriptMiss { prompt_hash: hash });
            }
        }
        let backend = self.backend.as_ref().ok_or_else(|| LlmError::EndpointUnreachable {
            attempts: 0,
            reason: "no endpoint configured".into(),
        })?;
        let start = Instant::now();
        let mut last = BackendError::Unreachable("no attempt made".into());
        for attempt in 0..self.attempts {
            if attempt > 0 {
                std::thread::sleep(self.backoff * 2u32.pow(attempt - 1));
            }
            match backend.complete(prompt) {
                Ok(c) => {
                    self.transcript.append(&TranscriptRecord::new(prompt, &c.text))?;
                    return Ok(LlmResponse {
                        verdict: parse_verdict(&c.text),
                        raw: c.text,
                        latency_ms: start.elapsed().as_millis() as u64,
                        prompt_tokens: c.prompt_tokens,
                        completion_tokens: c.completion_tokens,
                        replayed: false,
                    });
                }
                Err(e) if e.is_retryable() => {
                    log::warn!("attempt {} of {} failed: {e}", attempt + 1, self.attempts);
                    last = e;
                }
                Err(e) => return Err(LlmError::Endpoint(e.to_string())),
            }
        }
        Err(match last {
            BackendError::RateLimited => LlmError::RateLimited { attempts: self.attempts },
            e => LlmError::EndpointUnreachable {
                attempts: self.attempts,
                reason: e.to_string(),
            },
        })
    }

    /// Query every bundle with at most `max_in_flight` requests outstanding.
    /// Results keep the input order.
    pub fn query_all(&self, bundles: &[PromptBundle]) -> Vec<Result<LlmResponse, LlmError>> {
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Result<LlmResponse, LlmError>>>> = bundles.iter().map(|_| Mutex::new(None)).collect();
        let workers = self.max_in_flight.min(bundles.len()).max(1);
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= bundles.len() {
                        break;
                    }
                    let r = self.query(&bundles[i]);
                    *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(r);
                });
            }
        });
        slots
            .into_iter()
            .map(|m| m.into_inner().unwrap_or_else(|e| e.into_inner()).expect("every slot filled"))
            .collect()
    }
}

impl Adjudicator for LlmClient {
    fn complete(&self, prompt: &str) -> Result<String, AdjudicatorError> {
        self.complete_raw(prompt)
            .map(|r| r.raw)
            .map_err(|e| AdjudicatorError::AdjudicatorUnavailable(e.to_string()))
    }
}
