// SPDX-License-Identifier: Apache-2.0

//! Precision, recall and F-measure; experiment runners and report rendering.

mod experiments;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::ClassifyError;
use crate::corpus::CorpusError;
use crate::llmbridge::LlmError;
use crate::patterns::SaturationError;

pub use experiments::{
    combination_label, cross_validate, level_sweep, llm_eval, predict_all, saturation_from_labels, Method, MethodSpec,
};
pub use report::{render_report, render_saturation, DatasetDescriptor, EvalReport, EvalRow, FoldResult, ReportFormat};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction and gold id sets differ: {missing} gold ids without prediction, {extra} predictions without gold (first: {example})")]
    IdMismatch { missing: usize, extra: usize, example: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Saturation(#[from] SaturationError),
    #[error("{0}")]
    InvalidParameter(String),
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn record(&mut self, predicted: bool, gold: bool) {
        match (predicted, gold) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn add(&self, other: &ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            tn: self.tn + other.tn,
            fn_: self.fn_ + other.fn_,
        }
    }

    pub fn metrics(&self) -> Metrics {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        Metrics {
            precision,
            recall,
            f_measure: f_measure(precision, recall),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl Metrics {
    /// Unweighted mean of per-fold metrics.
    pub fn mean(items: &[Metrics]) -> Metrics {
        let n = items.len().max(1) as f64;
        Metrics {
            precision: items.iter().map(|m| m.precision).sum::<f64>() / n,
            recall: items.iter().map(|m| m.recall).sum::<f64>() / n,
            f_measure: items.iter().map(|m| m.f_measure).sum::<f64>() / n,
        }
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Confusion counts of `predicted` against `gold`. Both maps must cover the
/// same ids.
pub fn score(predicted: &BTreeMap<String, bool>, gold: &BTreeMap<String, bool>) -> Result<ConfusionCounts, EvalError> {
    let missing: Vec<&String> = gold.keys().filter(|k| !predicted.contains_key(*k)).collect();
    let extra: Vec<&String> = predicted.keys().filter(|k| !gold.contains_key(*k)).collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(EvalError::IdMismatch {
            missing: missing.len(),
            extra: extra.len(),
            example: missing.first().or(extra.first()).map(|s| s.to_string()).unwrap_or_default(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (id, &g) in gold {
        c.record(predicted[id], g);
    }
    Ok(c)
}
