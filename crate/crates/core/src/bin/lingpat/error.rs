// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use lingpat::classify::ClassifyError;
use lingpat::config::ConfigError;
use lingpat::corpus::CorpusError;
use lingpat::eval::EvalError;
use lingpat::lexicon::LexiconError;
use lingpat::llmbridge::LlmError;
use lingpat::patterns::{MiningError, PatternSetError, SaturationError};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_ENDPOINT: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Endpoint(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Endpoint(_) => EXIT_ENDPOINT,
        }
    }

    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::Usage(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Endpoint(m) => write!(f, "endpoint error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        if e.is_endpoint() {
            CliError::Endpoint(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Llm(l) => l.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        })*
    };
}

data_error!(
    ClassifyError,
    CorpusError,
    LexiconError,
    PatternSetError,
    MiningError,
    SaturationError,
    std::io::Error,
    serde_json::Error
);
