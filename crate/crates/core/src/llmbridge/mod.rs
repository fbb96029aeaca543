// SPDX-License-Identifier: Apache-2.0

//! Pattern-guided LLM prompting, transcript replay and fine-tune export.

mod backend;
mod client;
mod finetune;
mod prompt;
mod transcript;
mod verdict;

use thiserror::Error;

use crate::patterns::Level;

pub use backend::{BackendError, Completion, EndpointConfig, HttpBackend, LlmBackend, ENV_KEY, ENV_MODEL, ENV_URL};
pub use client::{LlmClient, LlmResponse, QueryMode};
pub use finetune::{
    export_finetune_file, finetune_record, level_block, load_finetune_file, render_text, FinetuneRecord,
};
pub use prompt::{
    build_prompt, estimate_tokens, exemplar_payload, level_tag, report_text, PromptBundle, PromptConfig,
    DEFAULT_MAX_PROMPT_TOKENS, INSTRUCTION,
};
pub use transcript::{prompt_hash, Transcript, TranscriptRecord};
pub use verdict::{parse_verdict, Verdict, CLASSIFICATION_CUE};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("{requested} {level} exemplars requested, {available} available")]
    InsufficientExemplars {
        level: Level,
        requested: usize,
        available: usize,
    },
    #[error("prompt estimated at {estimated} tokens exceeds the limit of {limit}")]
    PromptTooLong { estimated: usize, limit: usize },
    #[error("endpoint unreachable after {attempts} attempts: {reason}")]
    EndpointUnreachable { attempts: u32, reason: String },
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("endpoint error: {0}")]
    Endpoint(String),
    #[error("no transcript record for prompt {prompt_hash}")]
    TranscriptMiss { prompt_hash: String },
    #[error("transcript: {0}")]
    Transcript(String),
    #[error("report {0} is unlabeled")]
    UnlabeledData(String),
    #[error("no match report for {0}")]
    MissingMatchReport(String),
    #[error("{0}")]
    Io(String),
}

impl LlmError {
    /// Errors caused by the endpoint or a missing recording.
    pub fn is_endpoint(&self) -> bool {
        matches!(
            self,
            LlmError::EndpointUnreachable { .. }
                | LlmError::RateLimited { .. }
                | LlmError::Endpoint(_)
                | LlmError::TranscriptMiss { .. }
        )
    }
}
