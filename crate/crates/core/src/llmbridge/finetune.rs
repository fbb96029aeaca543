// SPDX-License-Identifier: Apache-2.0

//! Fine-tuning export: pattern blocks concatenated with the report text.
//!
//! Each line of the export is a JSON object. `text` has the form
//!
//! ```text
//! [CLS] [PATTERN:WORD] <w> [PATTERN:PHRASE] <p> [PATTERN:SENTENCE] <s> [PATTERN:BUG REPORT] <b> [BUG REPORT] <report> [SEP]
//! ```
//!
//! with single spaces between markers and contents. An empty block keeps
//! its marker, so a report without hits still yields
//! `[CLS] [PATTERN:WORD] [PATTERN:PHRASE] ... [BUG REPORT] <report> [SEP]`.
//! `label` is 1 for concurrency reports and 0 otherwise.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LlmError;
use crate::corpus::{Dataset, IssueReport, Label};
use crate::patterns::{Hit, Level, MatchReport, PatternSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetuneRecord {
    pub id: String,
    pub word: String,
    pub phrase: String,
    pub sentence: String,
    pub bug_report: String,
    pub report: String,
    pub text: String,
    pub label: u8,
}

fn marker(level: Level) -> String {
    format!("[PATTERN:{}]", level.as_str().to_uppercase())
}

fn distinct<'a>(hits: &'a [Hit], key: impl Fn(&'a Hit) -> String) -> Vec<String> {
    let mut seen = BTreeSet::new();
    hits.iter().map(key).filter(|k| seen.insert(k.clone())).collect()
}

/// Text content of one level's block.
pub fn level_block(level: Level, matches: &MatchReport, patterns: &PatternSet) -> String {
    let hits = matches.hits(level);
    let name = |h: &Hit| {
        patterns
            .get(&h.pattern_id)
            .and_then(|p| p.name())
            .unwrap_or(&h.pattern_id)
            .to_string()
    };
    match level {
        Level::Word => distinct(hits, |h| h.terms.join(" ")).join(", "),
        Level::Phrase => distinct(hits, |h| format!("({})", h.terms.join(", "))).join(" "),
        Level::Sentence => distinct(hits, |h| format!("{} ({})", name(h), h.terms.join(", "))).join("; "),
        Level::BugReport => distinct(hits, |h| format!("Root cause: {}", name(h).to_lowercase())).join("; "),
    }
}

pub fn render_text(blocks: &[(Level, String)], report: &str) -> String {
    let mut parts = vec!["[CLS]".to_string()];
    for (level, content) in blocks {
        parts.push(marker(*level));
        if !content.is_empty() {
            parts.push(content.clone());
        }
    }
    parts.push("[BUG REPORT]".into());
    if !report.is_empty() {
        parts.push(report.to_string());
    }
    parts.push("[SEP]".into());
    parts.join(" ")
}

pub fn finetune_record(report: &IssueReport, matches: &MatchReport, patterns: &PatternSet) -> Result<FinetuneRecord, LlmError> {
    let label = match report.label {
        Label::Concurrency => 1,
        Label::NonConcurrency => 0,
        Label::Unlabeled => return Err(LlmError::UnlabeledData(report.id.clone())),
    };
    let blocks: Vec<(Level, String)> = Level::ALL.iter().map(|l| (*l, level_block(*l, matches, patterns))).collect();
    let text_of = |l: Level| blocks.iter().find(|(b, _)| *b == l).map(|(_, t)| t.clone()).unwrap_or_default();
    let body = format!("{} {}", report.title, report.body)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    Ok(FinetuneRecord {
        id: report.id.clone(),
        word: text_of(Level::Word),
        phrase: text_of(Level::Phrase),
        sentence: text_of(Level::Sentence),
        bug_report: text_of(Level::BugReport),
        text: render_text(&blocks, &body),
        report: body,
        label,
    })
}

/// Write one record per report, in dataset order. Returns the record count.
pub fn export_finetune_file(
    dataset: &Dataset,
    matches: &[MatchReport],
    patterns: &PatternSet,
    path: &Path,
) -> Result<usize, LlmError> {
    let by_id: HashMap<&str, &MatchReport> = matches.iter().map(|m| (m.report_id.as_str(), m)).collect();
    let mut records = Vec::with_capacity(dataset.len());
    for r in &dataset.reports {
        let m = by_id
            .get(r.id.as_str())
            .ok_or_else(|| LlmError::MissingMatchReport(r.id.clone()))?;
        records.push(finetune_record(r, m, patterns)?);
    }
    let io = |e: std::io::Error| LlmError::Io(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for rec in &records {
        serde_json::to_writer(&mut w, rec).map_err(|e| LlmError::Io(e.to_string()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(records.len())
}

pub fn load_finetune_file(path: &Path) -> Result<Vec<FinetuneRecord>, LlmError> {
    let io = |e: std::io::Error| LlmError::Io(format!("{}: {e}", path.display()));
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path).map_err(io)?).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| LlmError::Io(format!("{} line {}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}
