// SPDX-License-Identifier: Apache-2.0

//! Issue-report datasets: ingestion from tracker exports, the canonical
//! line-delimited format, splitting and prevalence control.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime, Utc};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DATASET_FORMAT: &str = "lingpat-dataset";
pub const DATASET_VERSION: u32 = 1;

/// Share of malformed records above which a load is rejected.
pub const MAX_MALFORMED_FRACTION: f64 = 0.10;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    UnreadablePath {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema violation at record {index}: {reason}")]
    SchemaViolation { index: usize, reason: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("report {0} is unlabeled")]
    UnlabeledData(String),
    #[error("k = {k} exceeds the {available} labeled reports available")]
    KExceedsClassCount { k: usize, available: usize },
    #[error("need {needed} negatives, only {available} available")]
    InsufficientNegatives { needed: usize, available: usize },
    #[error("report {0} has no created_at timestamp")]
    NullTimestamp(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sentence label for {report_id} index {index} is out of range ({count} sentences)")]
    SentenceIndexOutOfRange {
        report_id: String,
        index: usize,
        count: usize,
    },
    #[error("sentence label references unknown report {0}")]
    UnknownReport(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Concurrency,
    NonConcurrency,
    Unlabeled,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Concurrency
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Concurrency => "concurrency",
            Label::NonConcurrency => "non_concurrency",
            Label::Unlabeled => "unlabeled",
        }
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "concurrency" | "positive" | "1" | "true" | "yes" => Ok(Label::Concurrency),
            "non_concurrency" | "nonconcurrency" | "negative" | "0" | "false" | "no" => {
                Ok(Label::NonConcurrency)
            }
            "unlabeled" | "" => Ok(Label::Unlabeled),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Github,
    Jira,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueReport {
    pub id: String,
    pub project: String,
    pub title: String,
    pub body: String,
    pub label: Label,
    pub source: Source,
    pub created_at: Option<DateTime<Utc>>,
}

impl IssueReport {
    pub fn validate(&self) -> Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("empty id".into());
        }
        if self.title.trim().is_empty() && self.body.trim().is_empty() {
            return Err("title and body are both empty".into());
        }
        Ok(())
    }

    /// Title and body joined by a blank line.
    pub fn full_text(&self) -> String {
        match (self.title.trim().is_empty(), self.body.trim().is_empty()) {
            (false, false) => format!("{}\n\n{}", self.title, self.body),
            (false, true) => self.title.clone(),
            _ => self.body.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub reports: Vec<IssueReport>,
}

impl Dataset {
    pub fn new(reports: Vec<IssueReport>) -> Dataset {
        Dataset { reports }
    }

    pub fn len(&self) -> usize {
        self.reports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reports.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&IssueReport> {
        self.reports.iter().find(|r| r.id == id)
    }

    pub fn positives(&self) -> usize {
        self.reports.iter().filter(|r| r.label.is_positive()).count()
    }

    pub fn require_labeled(&self) -> Result<(), CorpusError> {
        match self.reports.iter().find(|r| r.label == Label::Unlabeled) {
            Some(r) => Err(CorpusError::UnlabeledData(r.id.clone())),
            None => Ok(()),
        }
    }

    /// Reports whose ids are in `ids`, in dataset order.
    pub fn subset(&self, ids: &BTreeSet<String>) -> Dataset {
        Dataset::new(self.reports.iter().filter(|r| ids.contains(&r.id)).cloned().collect())
    }

    /// Canonical serialization: header line plus one JSON record per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&DatasetHeader::current()).expect("header serializes");
        out.push('\n');
        for r in &self.reports {
            out.push_str(&serde_json::to_string(r).expect("report serializes"));
            out.push('\n');
        }
        out
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_jsonl().as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct DatasetHeader {
    format: String,
    version: u32,
}

impl DatasetHeader {
    fn current() -> Self {
        DatasetHeader {
            format: DATASET_FORMAT.into(),
            version: DATASET_VERSION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    GitHubJson,
    JiraJson,
    Jsonl,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "github" | "github-json" | "githubjson" => Ok(InputFormat::GitHubJson),
            "jira" | "jira-json" | "jirajson" => Ok(InputFormat::JiraJson),
            "jsonl" | "canonical" => Ok(InputFormat::Jsonl),
            other => Err(format!("unknown input format {other:?}")),
        }
    }
}

/// Maps tracker label names to issue labels. An explicit `label` field on
/// a record always wins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRule {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
    pub fallback: Label,
}

impl Default for LabelRule {
    fn default() -> Self {
        LabelRule {
            positive: ["concurrency", "race-condition", "deadlock", "thread-safety", "concurrency-bug"]
                .map(String::from)
                .to_vec(),
            negative: Vec::new(),
            fallback: Label::Unlabeled,
        }
    }
}

impl LabelRule {
    pub fn apply<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Label {
        let names: Vec<String> = names.into_iter().map(|n| n.trim().to_lowercase()).collect();
        let hit = |list: &[String]| names.iter().any(|n| list.iter().any(|l| l.eq_ignore_ascii_case(n)));
        if hit(&self.positive) {
            Label::Concurrency
        } else if hit(&self.negative) {
            Label::NonConcurrency
        } else {
            self.fallback
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantineRecord {
    pub index: usize,
    pub reason: String,
    pub raw: String,
}

#[derive(Debug, Clone)]
pub struct LoadOutcome {
    pub dataset: Dataset,
    pub quarantined: Vec<QuarantineRecord>,
    pub quarantine_path: Option<PathBuf>,
}

pub fn quarantine_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".quarantine.jsonl");
    path.with_file_name(name)
}

/// Load with the default label rule.
pub fn load_dataset(path: impl AsRef<Path>, format: InputFormat) -> Result<LoadOutcome, CorpusError> {
    load_dataset_with(path, format, &LabelRule::default())
}

pub fn load_dataset_with(
    path: impl AsRef<Path>,
    format: InputFormat,
    rule: &LabelRule,
) -> Result<LoadOutcome, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::UnreadablePath {
        path: path.display().to_string(),
        source,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let parsed = parse_records(&text, format, &stem, rule)?;
    let outcome = validate_records(parsed)?;
    if outcome.quarantined.is_empty() {
        return Ok(outcome);
    }
    let qpath = quarantine_path(path);
    write_quarantine(&qpath, &outcome.quarantined)?;
    for q in &outcome.quarantined {
        log::warn!("{}: record {} quarantined: {}", path.display(), q.index, q.reason);
    }
    Ok(LoadOutcome {
        quarantine_path: Some(qpath),
        ..outcome
    })
}

/// Parse results per record: a report or (reason, raw text).
type Parsed = Vec<Result<IssueReport, (String, String)>>;

/// Parse without touching the filesystem.
pub fn parse_dataset(text: &str, format: InputFormat, project_hint: &str, rule: &LabelRule) -> Result<LoadOutcome, CorpusError> {
    validate_records(parse_records(text, format, project_hint, rule)?)
}

fn parse_records(text: &str, format: InputFormat, stem: &str, rule: &LabelRule) -> Result<Parsed, CorpusError> {
    match format {
        InputFormat::Jsonl => Ok(parse_canonical(text)),
        InputFormat::GitHubJson => {
            let items = json_items(text, "items")?;
            Ok(items.iter().map(|v| github_record(v, stem, rule).map_err(|e| (e, v.to_string()))).collect())
        }
        InputFormat::JiraJson => {
            let items = json_items(text, "issues")?;
            Ok(items.iter().map(|v| jira_record(v, stem, rule).map_err(|e| (e, v.to_string()))).collect())
        }
    }
}

fn validate_records(parsed: Parsed) -> Result<LoadOutcome, CorpusError> {
    let total = parsed.len();
    if total == 0 {
        return Err(CorpusError::EmptyDataset);
    }
    let mut seen = HashSet::new();
    let mut reports = Vec::new();
    let mut quarantined = Vec::new();
    for (index, item) in parsed.into_iter().enumerate() {
        let checked = item.and_then(|r| {
            r.validate().map_err(|e| (e, serde_json::to_string(&r).unwrap_or_default()))?;
            if !seen.insert(r.id.clone()) {
                return Err((format!("duplicate id {:?}", r.id), serde_json::to_string(&r).unwrap_or_default()));
            }
            Ok(r)
        });
        match checked {
            Ok(r) => reports.push(r),
            Err((reason, raw)) => quarantined.push(QuarantineRecord { index, reason, raw }),
        }
    }
    if quarantined.len() as f64 > MAX_MALFORMED_FRACTION * total as f64 {
        let first = &quarantined[0];
        return Err(CorpusError::SchemaViolation {
            index: first.index,
            reason: format!(
                "{} (and {} of {} records malformed in total)",
                first.reason,
                quarantined.len(),
                total
            ),
        });
    }
    if reports.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }
    Ok(LoadOutcome {
        dataset: Dataset::new(reports),
        quarantined,
        quarantine_path: None,
    })
}

fn parse_canonical(text: &str) -> Parsed {
    let mut out = Vec::new();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
    if let Some(first) = lines.peek() {
        if let Ok(h) = serde_json::from_str::<DatasetHeader>(first) {
            if h.format == DATASET_FORMAT {
                if h.version != DATASET_VERSION {
                    log::warn!("dataset version {} read as version {DATASET_VERSION}", h.version);
                }
                lines.next();
            }
        }
    }
    for line in lines {
        out.push(serde_json::from_str::<IssueReport>(line).map_err(|e| (e.to_string(), line.to_string())));
    }
    out
}

fn json_items(text: &str, wrapper: &str) -> Result<Vec<Value>, CorpusError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CorpusError::SchemaViolation {
        index: 0,
        reason: format!("not a JSON document: {e}"),
    })?;
    match value {
        Value::Array(items) => Ok(items),
        Value::Object(mut map) => match map.remove(wrapper) {
            Some(Value::Array(items)) => Ok(items),
            _ => Err(CorpusError::SchemaViolation {
                index: 0,
                reason: format!("expected an array or an object with {wrapper:?}"),
            }),
        },
        _ => Err(CorpusError::SchemaViolation {
            index: 0,
            reason: "expected an array of issues".into(),
        }),
    }
}

fn str_field<'a>(v: &'a Value, key: &str) -> Option<&'a str> {
    v.get(key).and_then(Value::as_str)
}

fn id_field(v: &Value, key: &str) -> Option<String> {
    match v.get(key)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn explicit_label(v: &Value) -> Result<Option<Label>, String> {
    match v.get("label") {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Bool(b)) => Ok(Some(if *b { Label::Concurrency } else { Label::NonConcurrency })),
        Some(Value::Number(n)) => n.to_string().parse().map(Some),
        Some(Value::String(s)) => s.parse().map(Some),
        Some(other) => Err(format!("unsupported label value {other}")),
    }
}

fn parse_timestamp(raw: &str) -> Result<DateTime<Utc>, String> {
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Ok(t.with_timezone(&Utc));
    }
    if let Ok(t) = DateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S%.f%z") {
        return Ok(t.with_timezone(&Utc));
    }
    if let Ok(t) = NaiveDateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S") {
        return Ok(t.and_utc());
    }
    Err(format!("unparseable timestamp {raw:?}"))
}

fn optional_timestamp(v: Option<&Value>) -> Result<Option<DateTime<Utc>>, String> {
    match v {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) if s.trim().is_empty() => Ok(None),
        Some(Value::String(s)) => parse_timestamp(s).map(Some),
        Some(other) => Err(format!("unsupported timestamp {other}")),
    }
}

fn github_record(v: &Value, stem: &str, rule: &LabelRule) -> Result<IssueReport, String> {
    let number = id_field(v, "number").or_else(|| id_field(v, "id")).ok_or("missing number/id")?;
    let project = str_field(v, "repository_url")
        .and_then(|u| u.split("/repos/").nth(1))
        .map(|p| p.trim_end_matches('/').to_string())
        .unwrap_or_else(|| stem.to_string());
    let names: Vec<&str> = v
        .get("labels")
        .and_then(Value::as_array)
        .map(|ls| {
            ls.iter()
                .filter_map(|l| l.get("name").and_then(Value::as_str).or_else(|| l.as_str()))
                .collect()
        })
        .unwrap_or_default();
    let label = match explicit_label(v)? {
        Some(l) => l,
        None => rule.apply(names),
    };
    Ok(IssueReport {
        id: if number.trim().is_empty() { String::new() } else { format!("{project}#{number}") },
        project,
        title: str_field(v, "title").unwrap_or_default().to_string(),
        body: str_field(v, "body").unwrap_or_default().to_string(),
        label,
        source: Source::Github,
        created_at: optional_timestamp(v.get("created_at"))?,
    })
}

fn jira_record(v: &Value, stem: &str, rule: &LabelRule) -> Result<IssueReport, String> {
    let key = str_field(v, "key").ok_or("missing key")?.to_string();
    let fields = v.get("fields").ok_or("missing fields")?;
    let project = fields
        .get("project")
        .and_then(|p| str_field(p, "key"))
        .map(str::to_string)
        .or_else(|| key.split_once('-').map(|(p, _)| p.to_string()))
        .unwrap_or_else(|| stem.to_string());
    let names: Vec<&str> = fields
        .get("labels")
        .and_then(Value::as_array)
        .map(|ls| ls.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    let label = match explicit_label(v)? {
        Some(l) => l,
        None => rule.apply(names),
    };
    Ok(IssueReport {
        id: key,
        project,
        title: str_field(fields, "summary").unwrap_or_default().to_string(),
        body: str_field(fields, "description").unwrap_or_default().to_string(),
        label,
        source: Source::Jira,
        created_at: optional_timestamp(fields.get("created"))?,
    })
}

fn write_quarantine(path: &Path, records: &[QuarantineRecord]) -> Result<(), CorpusError> {
    let err = |source| CorpusError::Write {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(err)?);
    for q in records {
        writeln!(w, "{}", serde_json::to_string(q).expect("serializes")).map_err(err)?;
    }
    w.flush().map_err(err)
}

/// Write the canonical line-delimited form.
pub fn save_dataset(path: impl AsRef<Path>, dataset: &Dataset) -> Result<(), CorpusError> {
    let path = path.as_ref();
    std::fs::write(path, dataset.to_jsonl()).map_err(|source| CorpusError::Write {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitStrategy {
    Ratio,
    StratifiedKFold,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train_ids: BTreeSet<String>,
    pub eval_ids: BTreeSet<String>,
    pub seed: u64,
    pub strategy: SplitStrategy,
}

fn shuffled_ids(mut ids: Vec<String>, rng: &mut ChaCha8Rng) -> Vec<String> {
    ids.sort();
    ids.shuffle(rng);
    ids
}

/// Seeded train/eval split with `round(n * ratio)` training reports.
pub fn split_ratio(dataset: &Dataset, ratio: f64, seed: u64) -> Result<DatasetSplit, CorpusError> {
    dataset.require_labeled()?;
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(CorpusError::InvalidParameter(format!("ratio {ratio} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = shuffled_ids(dataset.reports.iter().map(|r| r.id.clone()).collect(), &mut rng);
    let n_train = (ids.len() as f64 * ratio).round() as usize;
    Ok(DatasetSplit {
        train_ids: ids[..n_train].iter().cloned().collect(),
        eval_ids: ids[n_train..].iter().cloned().collect(),
        seed,
        strategy: SplitStrategy::Ratio,
    })
}

/// Stratified k folds. Positives are dealt round-robin across folds, then
/// negatives continue from the fold after the last positive, so both the
/// per-fold positive counts and the fold sizes differ by at most one.
pub fn stratified_kfold(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<DatasetSplit>, CorpusError> {
    dataset.require_labeled()?;
    if k < 2 {
        return Err(CorpusError::InvalidParameter(format!("k = {k}, need k >= 2")));
    }
    if k > dataset.len() {
        return Err(CorpusError::KExceedsClassCount {
            k,
            available: dataset.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos = shuffled_ids(
        dataset.reports.iter().filter(|r| r.label.is_positive()).map(|r| r.id.clone()).collect(),
        &mut rng,
    );
    let neg = shuffled_ids(
        dataset.reports.iter().filter(|r| !r.label.is_positive()).map(|r| r.id.clone()).collect(),
        &mut rng,
    );
    let mut folds: Vec<BTreeSet<String>> = vec![BTreeSet::new(); k];
    for (i, id) in pos.iter().chain(neg.iter()).enumerate() {
        folds[i % k].insert(id.clone());
    }
    let all: BTreeSet<String> = dataset.reports.iter().map(|r| r.id.clone()).collect();
    Ok(folds
        .into_iter()
        .map(|eval_ids| DatasetSplit {
            train_ids: all.difference(&eval_ids).cloned().collect(),
            eval_ids,
            seed,
            strategy: SplitStrategy::StratifiedKFold,
        })
        .collect())
}

/// Keep every positive and a seeded sample of negatives so positives make up
/// `positive_fraction` of the result. Dataset order is preserved.
pub fn downsample_to_prevalence(dataset: &Dataset, positive_fraction: f64, seed: u64) -> Result<Dataset, CorpusError> {
    dataset.require_labeled()?;
    if !(positive_fraction > 0.0 && positive_fraction < 1.0) {
        return Err(CorpusError::InvalidParameter(format!(
            "positive fraction {positive_fraction} outside (0, 1)"
        )));
    }
    let pos = dataset.positives();
    let needed = (pos as f64 * (1.0 - positive_fraction) / positive_fraction).round() as usize;
    let neg_ids: Vec<String> = dataset
        .reports
        .iter()
        .filter(|r| !r.label.is_positive())
        .map(|r| r.id.clone())
        .collect();
    if neg_ids.len() < needed {
        return Err(CorpusError::InsufficientNegatives {
            needed,
            available: neg_ids.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kept: HashSet<String> = shuffled_ids(neg_ids, &mut rng).into_iter().take(needed).collect();
    Ok(Dataset::new(
        dataset
            .reports
            .iter()
            .filter(|r| r.label.is_positive() || kept.contains(&r.id))
            .cloned()
            .collect(),
    ))
}

/// Reports created strictly after `cutoff`. Every report must carry a timestamp.
pub fn filter_post_cutoff(dataset: &Dataset, cutoff: DateTime<Utc>) -> Result<Dataset, CorpusError> {
    if let Some(r) = dataset.reports.iter().find(|r| r.created_at.is_none()) {
        return Err(CorpusError::NullTimestamp(r.id.clone()));
    }
    Ok(Dataset::new(
        dataset
            .reports
            .iter()
            .filter(|r| r.created_at.is_some_and(|t| t > cutoff))
            .cloned()
            .collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceLabel {
    pub report_id: String,
    pub sentence_index: usize,
    pub is_concurrency_related: bool,
}

pub fn load_sentence_labels(path: impl AsRef<Path>) -> Result<Vec<SentenceLabel>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::UnreadablePath {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = Vec::new();
    for (index, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| CorpusError::UnreadablePath {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CorpusError::SchemaViolation {
            index,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn save_sentence_labels(path: impl AsRef<Path>, labels: &[SentenceLabel]) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let mut text = String::new();
    for l in labels {
        text.push_str(&serde_json::to_string(l).expect("serializes"));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|source| CorpusError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Check each label against the segmented sentence count of its report.
pub fn validate_sentence_labels(
    labels: &[SentenceLabel],
    dataset: &Dataset,
    sentence_count: impl Fn(&IssueReport) -> usize,
) -> Result<(), CorpusError> {
    for l in labels {
        let report = dataset
            .get(&l.report_id)
            .ok_or_else(|| CorpusError::UnknownReport(l.report_id.clone()))?;
        let count = sentence_count(report);
        if l.sentence_index >= count {
            return Err(CorpusError::SentenceIndexOutOfRange {
                report_id: l.report_id.clone(),
                index: l.sentence_index,
                count,
            });
        }
    }
    Ok(())
}
