// SPDX-License-Identifier: Apache-2.0

//! Run configuration.
//!
//! A TOML file with `[data]`, `[run]`, `[model]`, `[eval]` and `[llm]`
//! sections. Every key is optional. Values resolve in the order
//! command-line flag, then config file, then built-in default.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classify::{Hyperparameters, ModelKind, Rebalance};
use crate::corpus::InputFormat;
use crate::eval::ReportFormat;
use crate::llmbridge::{EndpointConfig, QueryMode, DEFAULT_MAX_PROMPT_TOKENS};
use crate::patterns::{Level, SaturationUnit};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Parse { path: String, message: String },
    #[error("{field}: file {path} does not exist")]
    MissingFile { field: &'static str, path: String },
    #[error("{field} is required")]
    MissingField { field: &'static str },
    #[error("{field}: {message}")]
    Invalid { field: &'static str, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentence_labels: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patterns: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rebalance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_ratio: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub saturation_unit: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heldout_fraction: Option<f64>,
}

/// Endpoint settings. The API key is read from the environment only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timeout_secs: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attempts: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backoff_ms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_in_flight: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exemplars: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_prompt_tokens: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub run: RunSection,
    pub model: ModelConfig,
    pub eval: EvalConfig,
    pub llm: LlmConfig,
}

fn overlay(top: Value, bottom: Value) -> Value {
    match (top, bottom) {
        (Value::Object(top), Value::Object(mut bottom)) => {
            for (k, v) in top {
                let merged = match bottom.remove(&k) {
                    Some(b) => overlay(v, b),
                    None => v,
                };
                bottom.insert(k, merged);
            }
            Value::Object(bottom)
        }
        (Value::Null, bottom) => bottom,
        (top, _) => top,
    }
}

fn parse_field<T: FromStr<Err = String>>(field: &'static str, raw: &str) -> Result<T, ConfigError> {
    raw.parse().map_err(|message| ConfigError::Invalid { field, message })
}

/// Parse a list of level names. `all` expands to the four levels.
pub fn parse_levels(field: &'static str, raw: &[String]) -> Result<Vec<Level>, ConfigError> {
    let mut out = Vec::new();
    for item in raw.iter().flat_map(|r| r.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
        if item.eq_ignore_ascii_case("all") {
            out.extend(Level::ALL);
        } else {
            out.push(parse_field::<Level>(field, item)?);
        }
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(ConfigError::Invalid {
            field,
            message: "no levels given".into(),
        });
    }
    Ok(out)
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &str) -> Result<RunConfig, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.into(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        RunConfig::from_toml(&text, &path.display().to_string())
    }

    /// `self` wins wherever it sets a value.
    pub fn over(&self, lower: &RunConfig) -> RunConfig {
        let merged = overlay(
            serde_json::to_value(self).expect("config serializes"),
            serde_json::to_value(lower).expect("config serializes"),
        );
        serde_json::from_value(merged).expect("merged config deserializes")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Check that every referenced input file exists and every enumerated
    /// value parses.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let files: [(&'static str, &Option<PathBuf>); 5] = [
            ("data.dataset", &self.data.dataset),
            ("data.sentence_labels", &self.data.sentence_labels),
            ("data.matches", &self.data.matches),
            ("data.lexicon", &self.data.lexicon),
            ("data.patterns", &self.data.patterns),
        ];
        for (field, path) in files {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(ConfigError::MissingFile {
                        field,
                        path: p.display().to_string(),
                    });
                }
            }
        }
        self.input_format()?;
        self.model_kind()?;
        self.rebalance()?;
        self.hyperparameters()?;
        self.report_format()?;
        self.query_mode()?;
        self.saturation_unit()?;
        if let Some(l) = &self.model.levels {
            parse_levels("model.levels", l)?;
        }
        if let Some(l) = &self.eval.levels {
            parse_levels("eval.levels", l)?;
        }
        if self.jobs() == 0 {
            return Err(ConfigError::Invalid {
                field: "run.jobs",
                message: "must be at least 1".into(),
            });
        }
        if self.folds() < 2 {
            return Err(ConfigError::Invalid {
                field: "eval.folds",
                message: "must be at least 2".into(),
            });
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.run.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn jobs(&self) -> usize {
        self.run.jobs.unwrap_or(1)
    }

    pub fn folds(&self) -> usize {
        self.eval.folds.unwrap_or(DEFAULT_FOLDS)
    }

    /// `path` under `run.output_dir` when it is relative.
    pub fn output_path(&self, path: &Path) -> PathBuf {
        match &self.run.output_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    pub fn input_format(&self) -> Result<InputFormat, ConfigError> {
        parse_field("data.format", self.data.format.as_deref().unwrap_or("jsonl"))
    }

    pub fn model_kind(&self) -> Result<ModelKind, ConfigError> {
        parse_field("model.kind", self.model.kind.as_deref().unwrap_or("lr"))
    }

    pub fn rebalance(&self) -> Result<Rebalance, ConfigError> {
        parse_field("model.rebalance", self.model.rebalance.as_deref().unwrap_or("none"))
    }

    pub fn target_ratio(&self) -> f64 {
        self.model.target_ratio.unwrap_or(1.0)
    }

    pub fn model_levels(&self) -> Result<Vec<Level>, ConfigError> {
        match &self.model.levels {
            Some(l) => parse_levels("model.levels", l),
            None => Ok(Level::ALL.to_vec()),
        }
    }

    pub fn eval_levels(&self) -> Result<Vec<Level>, ConfigError> {
        match &self.eval.levels {
            Some(l) => parse_levels("eval.levels", l),
            None => Ok(Level::ALL.to_vec()),
        }
    }

    pub fn hyperparameters(&self) -> Result<Hyperparameters, ConfigError> {
        let d = Hyperparameters::default();
        let hp = Hyperparameters {
            learning_rate: self.model.learning_rate.unwrap_or(d.learning_rate),
            l2: self.model.l2.unwrap_or(d.l2),
            epochs: self.model.epochs.unwrap_or(d.epochs),
            alpha: self.model.alpha.unwrap_or(d.alpha),
            threshold: self.model.threshold.unwrap_or(d.threshold),
        };
        let checks: [(&'static str, bool); 4] = [
            ("model.learning_rate", hp.learning_rate > 0.0 && hp.learning_rate.is_finite()),
            ("model.l2", hp.l2 >= 0.0 && hp.l2.is_finite()),
            ("model.alpha", hp.alpha > 0.0 && hp.alpha.is_finite()),
            ("model.threshold", (0.0..=1.0).contains(&hp.threshold)),
        ];
        for (field, ok) in checks {
            if !ok {
                return Err(ConfigError::Invalid {
                    field,
                    message: "out of range".into(),
                });
            }
        }
        Ok(hp)
    }

    pub fn report_format(&self) -> Result<ReportFormat, ConfigError> {
        parse_field("eval.format", self.eval.format.as_deref().unwrap_or("plain"))
    }

    pub fn query_mode(&self) -> Result<QueryMode, ConfigError> {
        parse_field("llm.mode", self.llm.mode.as_deref().unwrap_or("replay-or-live"))
    }

    pub fn saturation_unit(&self) -> Result<SaturationUnit, ConfigError> {
        parse_field("eval.saturation_unit", self.eval.saturation_unit.as_deref().unwrap_or("tenths"))
    }

    pub fn heldout_fraction(&self) -> f64 {
        self.eval.heldout_fraction.unwrap_or(0.3)
    }

    pub fn exemplars(&self) -> usize {
        self.llm.exemplars.unwrap_or(1)
    }

    pub fn max_prompt_tokens(&self) -> usize {
        self.llm.max_prompt_tokens.unwrap_or(DEFAULT_MAX_PROMPT_TOKENS)
    }

    /// Endpoint settings: config values over environment over defaults.
    pub fn endpoint(&self) -> EndpointConfig {
        let mut e = EndpointConfig::default().with_env();
        if let Some(u) = &self.llm.url {
            e.url = u.clone();
        }
        if let Some(m) = &self.llm.model {
            e.model = m.clone();
        }
        if let Some(t) = self.llm.timeout_secs {
            e.timeout_secs = t;
        }
        if let Some(a) = self.llm.attempts {
            e.attempts = a;
        }
        if let Some(b) = self.llm.backoff_ms {
            e.backoff_ms = b;
        }
        if let Some(m) = self.llm.max_in_flight {
            e.max_in_flight = m;
        }
        e
    }
}
