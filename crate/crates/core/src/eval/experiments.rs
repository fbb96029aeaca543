// SPDX-License-Identifier: Apache-2.0

//! Level sweeps, cross-validation and LLM-backed evaluation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use serde::{Deserialize, Serialize};

use super::report::{DatasetDescriptor, EvalReport, EvalRow, FoldResult};
use super::{score, EvalError};
use crate::classify::{
    classify_by_levels, rebalance, train, vectorize_with, FeatureLayout, FeatureVector, Hyperparameters, ModelKind,
    Predictor, Rebalance, TrainingSet,
};
use crate::corpus::{stratified_kfold, Dataset, SentenceLabel};
use crate::lexicon::Lexicon;
use crate::llmbridge::{build_prompt, LlmClient, PromptBundle, PromptConfig};
use crate::patterns::{saturation_curve, Level, MatchReport, PatternSet, SaturationConfig, SaturationCurve, SaturationError};
use crate::pipeline::parallel_map;
use crate::textproc::ProcessedSentence;

/// Display name of a level combination: the level name for a single level,
/// `None` for no levels, otherwise short tags joined by `+`.
pub fn combination_label(levels: &[Level]) -> String {
    let set: BTreeSet<Level> = levels.iter().copied().collect();
    match set.len() {
        0 => "None".into(),
        1 => {
            let name = set.first().expect("one level").as_str();
            let mut c = name.chars();
            c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
        }
        _ => set.iter().map(|l| l.short()).collect::<Vec<_>>().join("+"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Method {
    /// Positive iff any selected level has a hit.
    Matching,
    /// A linear model over the selected levels' pattern bits.
    Model {
        kind: ModelKind,
        hyperparameters: Hyperparameters,
        rebalance: Rebalance,
        target_ratio: f64,
    },
}

impl Method {
    pub fn model(kind: ModelKind) -> Method {
        Method::Model {
            kind,
            hyperparameters: Hyperparameters::default(),
            rebalance: Rebalance::None,
            target_ratio: 1.0,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Method::Matching => "Matching".into(),
            Method::Model { kind, rebalance, .. } => match rebalance {
                Rebalance::None => kind.short().into(),
                Rebalance::RandomOversample => format!("{}+oversample", kind.short()),
                Rebalance::Smote => format!("{}+SMOTE", kind.short()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: Method,
    pub levels: Vec<Level>,
}

impl MethodSpec {
    pub fn new(method: Method, levels: &[Level]) -> MethodSpec {
        MethodSpec {
            method,
            levels: levels.to_vec(),
        }
    }
}

fn gold(dataset: &Dataset) -> BTreeMap<String, bool> {
    dataset.reports.iter().map(|r| (r.id.clone(), r.label.is_positive())).collect()
}

fn check_aligned(dataset: &Dataset, matches: &[MatchReport]) -> Result<(), EvalError> {
    let mismatch = dataset.len() != matches.len() || dataset.reports.iter().zip(matches).any(|(r, m)| r.id != m.report_id);
    if mismatch {
        let example = dataset
            .reports
            .iter()
            .zip(matches)
            .find(|(r, m)| r.id != m.report_id)
            .map(|(r, _)| r.id.clone())
            .unwrap_or_default();
        return Err(EvalError::IdMismatch {
            missing: dataset.len().saturating_sub(matches.len()),
            extra: matches.len().saturating_sub(dataset.len()),
            example,
        });
    }
    Ok(())
}

/// Matching-based classification of every report at each combination.
pub fn level_sweep(
    name: &str,
    dataset: &Dataset,
    matches: &[MatchReport],
    combinations: &[Vec<Level>],
) -> Result<EvalReport, EvalError> {
    dataset.require_labeled()?;
    check_aligned(dataset, matches)?;
    let gold = gold(dataset);
    let mut report = EvalReport::new("level-sweep", DatasetDescriptor::of(name, dataset), 0);
    for levels in combinations {
        let predicted = matches
            .iter()
            .map(|m| (m.report_id.clone(), classify_by_levels(m, levels).predicted.is_positive()))
            .collect();
        report
            .rows
            .push(EvalRow::from_counts("Matching", combination_label(levels), score(&predicted, &gold)?));
    }
    Ok(report)
}

/// Predictions for the `test` ids after fitting on the `train` ids.
pub fn predict_all(
    spec: &MethodSpec,
    matches: &[MatchReport],
    vectors: &[FeatureVector],
    labels: &[bool],
    train_idx: &[usize],
    test_idx: &[usize],
    seed: u64,
) -> Result<BTreeMap<String, bool>, EvalError> {
    match spec.method {
        Method::Matching => Ok(test_idx
            .iter()
            .map(|&i| (matches[i].report_id.clone(), classify_by_levels(&matches[i], &spec.levels).predicted.is_positive()))
            .collect()),
        Method::Model {
            kind,
            hyperparameters,
            rebalance: method,
            target_ratio,
        } => {
            let layout_hash = vectors.first().map(|v| v.layout_hash.clone()).unwrap_or_default();
            let data = TrainingSet::new(
                layout_hash,
                train_idx.iter().map(|&i| vectors[i].bits.clone()).collect(),
                train_idx.iter().map(|&i| labels[i]).collect(),
            )?;
            let data = rebalance(&data, method, target_ratio, seed)?;
            let model = train(kind, &data, &hyperparameters, seed)?;
            test_idx
                .iter()
                .map(|&i| Ok((vectors[i].report_id.clone(), model.predict(&vectors[i])?.predicted.is_positive())))
                .collect()
        }
    }
}

/// Stratified k-fold evaluation of `spec`; each report is scored once, in
/// the fold that holds it out.
pub fn cross_validate(
    name: &str,
    dataset: &Dataset,
    matches: &[MatchReport],
    patterns: &PatternSet,
    k: usize,
    specs: &[MethodSpec],
    seed: u64,
    jobs: usize,
) -> Result<EvalReport, EvalError> {
    dataset.require_labeled()?;
    check_aligned(dataset, matches)?;
    if k < 2 {
        return Err(EvalError::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let folds = stratified_kfold(dataset, k, seed)?;
    let index: BTreeMap<&str, usize> = dataset.reports.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    let labels: Vec<bool> = dataset.reports.iter().map(|r| r.label.is_positive()).collect();
    let gold = gold(dataset);
    let mut report = EvalReport::new(format!("cross-validation-{k}fold"), DatasetDescriptor::of(name, dataset), seed);
    for spec in specs {
        let layout = FeatureLayout::new(patterns, &spec.levels);
        let vectors = matches
            .iter()
            .map(|m| vectorize_with(m, &layout))
            .collect::<Result<Vec<_>, _>>()?;
        let numbered: Vec<(usize, &crate::corpus::DatasetSplit)> = folds.iter().enumerate().collect();
        let results = parallel_map(&numbered, jobs, |&(f, split)| -> Result<FoldResult, EvalError> {
            let train_idx: Vec<usize> = split.train_ids.iter().map(|id| index[id.as_str()]).collect();
            let test_idx: Vec<usize> = split.eval_ids.iter().map(|id| index[id.as_str()]).collect();
            let predicted = predict_all(spec, matches, &vectors, &labels, &train_idx, &test_idx, seed.wrapping_add(f as u64))?;
            let fold_gold = split.eval_ids.iter().map(|id| (id.clone(), gold[id])).collect();
            let counts = score(&predicted, &fold_gold)?;
            Ok(FoldResult {
                fold: f,
                counts,
                metrics: counts.metrics(),
            })
        });
        let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
        report
            .rows
            .push(EvalRow::from_folds(spec.method.name(), combination_label(&spec.levels), results));
    }
    Ok(report)
}

/// Classify every report with LP-guided prompts, one row per exemplar-level
/// combination. Unparseable replies count as negative.
pub fn llm_eval(
    name: &str,
    dataset: &Dataset,
    matches: &[MatchReport],
    patterns: &PatternSet,
    client: &LlmClient,
    combinations: &[Vec<Level>],
    exemplars_per_level: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    dataset.require_labeled()?;
    check_aligned(dataset, matches)?;
    let gold = gold(dataset);
    let mut report = EvalReport::new("llm-prompting", DatasetDescriptor::of(name, dataset), seed);
    for levels in combinations {
        let mut config = PromptConfig::for_levels(levels, exemplars_per_level, seed);
        config.max_prompt_tokens = usize::MAX;
        let bundles = dataset
            .reports
            .iter()
            .zip(matches)
            .map(|(r, m)| build_prompt(patterns, r, Some(m), &config))
            .collect::<Result<Vec<PromptBundle>, _>>()?;
        let mut predicted = BTreeMap::new();
        for (r, resp) in dataset.reports.iter().zip(client.query_all(&bundles)) {
            predicted.insert(r.id.clone(), resp?.verdict.is_positive());
        }
        report
            .rows
            .push(EvalRow::from_counts("LLM", combination_label(levels), score(&predicted, &gold)?));
    }
    Ok(report)
}

/// Saturation over labeled concurrency sentences. A seeded
/// `heldout_fraction` of the reports with labeled sentences is held out;
/// the labeled sentences of the others form the derivation corpus.
pub fn saturation_from_labels(
    dataset: &Dataset,
    sentences: &[Vec<ProcessedSentence>],
    labels: &[SentenceLabel],
    lexicon: &Lexicon,
    patterns: &PatternSet,
    heldout_fraction: f64,
    config: &SaturationConfig,
) -> Result<SaturationCurve, EvalError> {
    if !(0.0..1.0).contains(&heldout_fraction) {
        return Err(EvalError::InvalidParameter(format!("held-out fraction {heldout_fraction} outside [0, 1)")));
    }
    let related: BTreeSet<(&str, usize)> = labels
        .iter()
        .filter(|l| l.is_concurrency_related)
        .map(|l| (l.report_id.as_str(), l.sentence_index))
        .collect();
    let mut with_labels: Vec<&str> = dataset
        .reports
        .iter()
        .map(|r| r.id.as_str())
        .filter(|id| related.iter().any(|(r, _)| r == id))
        .collect();
    if with_labels.is_empty() {
        return Err(SaturationError::MissingSentenceLabels.into());
    }
    with_labels.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let cut = ((with_labels.len() as f64) * heldout_fraction).round() as usize;
    let heldout_ids: BTreeSet<&str> = with_labels[..cut.min(with_labels.len())].iter().copied().collect();
    let mut derivation = Vec::new();
    let mut heldout = Vec::new();
    for s in sentences.iter().flatten() {
        if related.contains(&(s.report_id.as_str(), s.index)) {
            if heldout_ids.contains(s.report_id.as_str()) {
                heldout.push(s.clone());
            } else {
                derivation.push(s.clone());
            }
        }
    }
    let projects: HashMap<String, String> = dataset.reports.iter().map(|r| (r.id.clone(), r.project.clone())).collect();
    Ok(saturation_curve(&derivation, &heldout, &projects, lexicon, patterns, config)?)
}
