// SPDX-License-Identifier: Apache-2.0

//! Report classification: level matching, binary pattern features and
//! linear models over them.

mod model;
mod rebalance;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::patterns::{Level, MatchReport, PatternSet};

pub use model::{
    loss_and_gradient, predict, train, Hyperparameters, ModelKind, Predictor, TrainedModel, MODEL_HEADER,
};
pub use rebalance::{rebalance, Rebalance, SMOTE_NEIGHBORS};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("feature layout {found} does not match expected layout {expected}")]
    LayoutMismatch { expected: String, found: String },
    #[error("training data contains a single class")]
    SingleClassData,
    #[error("training loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("model file line {line}: {message}")]
    InvalidModel { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    Concurrency,
    NonConcurrency,
}

impl Prediction {
    pub fn from_bool(positive: bool) -> Prediction {
        if positive {
            Prediction::Concurrency
        } else {
            Prediction::NonConcurrency
        }
    }

    pub fn is_positive(self) -> bool {
        self == Prediction::Concurrency
    }
}

impl From<Prediction> for Label {
    fn from(p: Prediction) -> Label {
        match p {
            Prediction::Concurrency => Label::Concurrency,
            Prediction::NonConcurrency => Label::NonConcurrency,
        }
    }
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prediction::Concurrency => "concurrency",
            Prediction::NonConcurrency => "non_concurrency",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub report_id: String,
    pub predicted: Prediction,
    pub score: f64,
    /// Pattern ids that supported the decision.
    pub evidence: Vec<String>,
}

/// Concurrency iff any of `levels` has a hit. Score is 1 or 0.
pub fn classify_by_levels(report: &MatchReport, levels: &[Level]) -> Classification {
    let evidence: BTreeSet<String> = levels
        .iter()
        .flat_map(|l| report.hits(*l))
        .map(|h| h.pattern_id.clone())
        .collect();
    let positive = !evidence.is_empty();
    Classification {
        report_id: report.report_id.clone(),
        predicted: Prediction::from_bool(positive),
        score: if positive { 1.0 } else { 0.0 },
        evidence: evidence.into_iter().collect(),
    }
}

pub fn classify_by_matching(report: &MatchReport, level: Level) -> Classification {
    classify_by_levels(report, &[level])
}

/// Which patterns become features, in pattern-set order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub ids: Vec<String>,
    pub levels: Vec<Level>,
    /// Hash of the feature subset; models are bound to it.
    pub hash: String,
    /// Hash of the pattern set match reports must come from.
    pub source_hash: String,
}

impl FeatureLayout {
    pub fn new(patterns: &PatternSet, levels: &[Level]) -> FeatureLayout {
        let subset = patterns.restrict(|p| levels.contains(&p.level));
        FeatureLayout {
            ids: subset.ids().into_iter().map(String::from).collect(),
            levels: Level::ALL.into_iter().filter(|l| levels.contains(l)).collect(),
            hash: subset.layout_hash(),
            source_hash: patterns.layout_hash(),
        }
    }

    pub fn full(patterns: &PatternSet) -> FeatureLayout {
        FeatureLayout::new(patterns, &Level::ALL)
    }

    /// The level combination whose feature subset hashes to `hash`.
    pub fn for_hash(patterns: &PatternSet, hash: &str) -> Option<FeatureLayout> {
        (1u8..16)
            .map(|mask| {
                let levels: Vec<Level> = Level::ALL.into_iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, l)| l).collect();
                FeatureLayout::new(patterns, &levels)
            })
            .find(|l| l.hash == hash)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub report_id: String,
    pub bits: Vec<u8>,
    pub layout_hash: String,
}

impl FeatureVector {
    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|b| **b == 1).count()
    }
}

/// Bit `i` is set iff pattern `i` of the full set has at least one hit.
pub fn vectorize(report: &MatchReport, patterns: &PatternSet) -> Result<FeatureVector, ClassifyError> {
    vectorize_with(report, &FeatureLayout::full(patterns))
}

pub fn vectorize_with(report: &MatchReport, layout: &FeatureLayout) -> Result<FeatureVector, ClassifyError> {
    if report.pattern_set_hash != layout.source_hash {
        return Err(ClassifyError::LayoutMismatch {
            expected: layout.source_hash.clone(),
            found: report.pattern_set_hash.clone(),
        });
    }
    let hit = report.hit_ids();
    Ok(FeatureVector {
        report_id: report.report_id.clone(),
        bits: layout.ids.iter().map(|id| u8::from(hit.contains(id.as_str()))).collect(),
        layout_hash: layout.hash.clone(),
    })
}

/// Feature rows and binary labels sharing one layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub layout_hash: String,
    pub rows: Vec<Vec<u8>>,
    pub labels: Vec<bool>,
}

impl TrainingSet {
    pub fn new(layout_hash: impl Into<String>, rows: Vec<Vec<u8>>, labels: Vec<bool>) -> Result<TrainingSet, ClassifyError> {
        if rows.len() != labels.len() {
            return Err(ClassifyError::InvalidParameter(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(first) = rows.first() {
            if rows.iter().any(|r| r.len() != first.len()) {
                return Err(ClassifyError::InvalidParameter("rows differ in length".into()));
            }
        }
        Ok(TrainingSet {
            layout_hash: layout_hash.into(),
            rows,
            labels,
        })
    }

    pub fn from_vectors(vectors: &[FeatureVector], labels: &[bool]) -> Result<TrainingSet, ClassifyError> {
        let hash = vectors.first().map(|v| v.layout_hash.clone()).unwrap_or_default();
        if let Some(v) = vectors.iter().find(|v| v.layout_hash != hash) {
            return Err(ClassifyError::LayoutMismatch {
                expected: hash,
                found: v.layout_hash.clone(),
            });
        }
        TrainingSet::new(hash, vectors.iter().map(|v| v.bits.clone()).collect(), labels.to_vec())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|l| **l).count()
    }

    fn require_both_classes(&self) -> Result<(), ClassifyError> {
        let p = self.positives();
        if p == 0 || p == self.len() {
            Err(ClassifyError::SingleClassData)
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::Hit;

    fn hit(id: &str) -> Hit {
        Hit {
            pattern_id: id.into(),
            sentence_index: 0,
            span: (0, 1),
            terms: vec![],
            negated: false,
        }
    }

    #[test]
    fn matching_levels() {
        let set = PatternSet::default_set();
        let mut m = MatchReport::empty("r", &set);
        for l in Level::ALL {
            assert_eq!(classify_by_matching(&m, l).predicted, Prediction::NonConcurrency);
        }
        m.word_hits.push(hit("KW01"));
        let c = classify_by_matching(&m, Level::Word);
        assert_eq!((c.predicted, c.score), (Prediction::Concurrency, 1.0));
        assert_eq!(classify_by_matching(&m, Level::BugReport).score, 0.0);
    }

    #[test]
    fn vector_bits() {
        let set = PatternSet::default_set();
        let mut m = MatchReport::empty("r", &set);
        let v = vectorize(&m, &set).unwrap();
        assert_eq!(v.bits.len(), 58);
        assert_eq!(v.ones(), 0);
        m.word_hits = vec![hit("KW01"), hit("KW01")];
        m.phrase_hits = vec![hit("PH1")];
        let v = vectorize(&m, &set).unwrap();
        assert_eq!(v.ones(), 2);
        assert_eq!(v.bits[set.index_of("PH1").unwrap()], 1);
        assert_eq!(v.layout_hash, set.layout_hash());

        let layout = FeatureLayout::new(&set, &[Level::Phrase]);
        let pv = vectorize_with(&m, &layout).unwrap();
        assert_eq!(pv.bits.len(), set.count(Level::Phrase));
        assert_eq!(pv.ones(), 1);
    }

    #[test]
    fn layout_mismatch() {
        let set = PatternSet::default_set();
        let other = set.restrict(|p| p.level == Level::Word);
        let m = MatchReport::empty("r", &other);
        assert!(matches!(vectorize(&m, &set), Err(ClassifyError::LayoutMismatch { .. })));
    }
}
