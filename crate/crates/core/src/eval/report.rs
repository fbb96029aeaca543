// SPDX-License-Identifier: Apache-2.0

//! Evaluation reports and their plain, Markdown and CSV renderings.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ConfusionCounts, EvalError, Metrics};
use crate::corpus::Dataset;
use crate::patterns::{Level, SaturationCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    PlainTable,
    MarkdownTable,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plain" | "table" | "plain_table" => Ok(ReportFormat::PlainTable),
            "markdown" | "md" | "markdown_table" => Ok(ReportFormat::MarkdownTable),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub name: String,
    pub reports: usize,
    pub positives: usize,
    pub content_hash: String,
}

impl DatasetDescriptor {
    pub fn of(name: impl Into<String>, dataset: &Dataset) -> DatasetDescriptor {
        DatasetDescriptor {
            name: name.into(),
            reports: dataset.len(),
            positives: dataset.positives(),
            content_hash: dataset.content_hash(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub counts: ConfusionCounts,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub method: String,
    pub combination: String,
    pub counts: ConfusionCounts,
    /// Micro-averaged: computed from the summed counts.
    pub metrics: Metrics,
    /// Mean of per-fold metrics; equal to `metrics` without folds.
    pub macro_metrics: Metrics,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub folds: Vec<FoldResult>,
}

impl EvalRow {
    pub fn from_counts(method: impl Into<String>, combination: impl Into<String>, counts: ConfusionCounts) -> EvalRow {
        let metrics = counts.metrics();
        EvalRow {
            method: method.into(),
            combination: combination.into(),
            counts,
            metrics,
            macro_metrics: metrics,
            folds: Vec::new(),
        }
    }

    pub fn from_folds(method: impl Into<String>, combination: impl Into<String>, folds: Vec<FoldResult>) -> EvalRow {
        let counts = folds.iter().fold(ConfusionCounts::default(), |a, f| a.add(&f.counts));
        let per_fold: Vec<Metrics> = folds.iter().map(|f| f.metrics).collect();
        EvalRow {
            method: method.into(),
            combination: combination.into(),
            counts,
            metrics: counts.metrics(),
            macro_metrics: Metrics::mean(&per_fold),
            folds,
        }
    }
}

/// Results of one experiment. `runtime_ms` is informational and is not
/// serialized, so repeated runs serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub experiment_id: String,
    pub dataset: DatasetDescriptor,
    pub seed: u64,
    pub rows: Vec<EvalRow>,
    #[serde(skip)]
    pub runtime_ms: u64,
}

impl EvalReport {
    pub fn new(experiment_id: impl Into<String>, dataset: DatasetDescriptor, seed: u64) -> EvalReport {
        EvalReport {
            experiment_id: experiment_id.into(),
            dataset,
            seed,
            rows: Vec::new(),
            runtime_ms: 0,
        }
    }

    pub fn row(&self, method: &str, combination: &str) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.method == method && r.combination == combination)
    }

    /// Append the rows of a report produced elsewhere on the same dataset,
    /// such as CSV metrics read back with [`EvalReport::from_csv`].
    pub fn merge(&mut self, other: EvalReport) -> Result<(), EvalError> {
        if other.dataset.name != self.dataset.name || other.dataset.reports != self.dataset.reports {
            return Err(EvalError::InvalidParameter(format!(
                "cannot merge rows for dataset {} ({} reports) into {} ({} reports)",
                other.dataset.name, other.dataset.reports, self.dataset.name, self.dataset.reports
            )));
        }
        for row in other.rows {
            if self.row(&row.method, &row.combination).is_some() {
                return Err(EvalError::InvalidParameter(format!(
                    "row {} / {} already present",
                    row.method, row.combination
                )));
            }
            self.rows.push(row);
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Rebuild rows from CSV produced by [`render_report`]. Fold lines are
    /// attached to the aggregate row that precedes them.
    pub fn from_csv(text: &str) -> Result<EvalReport, EvalError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let bad = |line: usize, message: String| EvalError::Csv { line: line + 1, message };
        match lines.next() {
            Some((_, h)) if h == CSV_HEADER => {}
            Some((i, h)) => return Err(bad(i, format!("unexpected header {h:?}"))),
            None => return Err(bad(0, "empty csv".into())),
        }
        let mut report: Option<EvalReport> = None;
        for (i, line) in lines {
            let f = split_csv(line);
            if f.len() != CSV_COLUMNS {
                return Err(bad(i, format!("expected {CSV_COLUMNS} fields, found {}", f.len())));
            }
            let num = |k: usize| f[k].parse::<f64>().map_err(|_| bad(i, format!("bad number {:?}", f[k])));
            let int = |k: usize| f[k].parse::<usize>().map_err(|_| bad(i, format!("bad count {:?}", f[k])));
            let counts = ConfusionCounts {
                tp: int(12)?,
                fp: int(13)?,
                tn: int(14)?,
                fn_: int(15)?,
            };
            let metrics = Metrics {
                precision: num(6)?,
                recall: num(7)?,
                f_measure: num(8)?,
            };
            let macro_metrics = Metrics {
                precision: num(9)?,
                recall: num(10)?,
                f_measure: num(11)?,
            };
            let r = report.get_or_insert_with(|| EvalReport {
                experiment_id: f[0].clone(),
                dataset: DatasetDescriptor {
                    name: f[1].clone(),
                    reports: counts.total(),
                    positives: counts.tp + counts.fn_,
                    content_hash: String::new(),
                },
                seed: f[2].parse().unwrap_or(0),
                rows: Vec::new(),
                runtime_ms: 0,
            });
            if f[5] == "all" {
                r.rows.push(EvalRow {
                    method: f[3].clone(),
                    combination: f[4].clone(),
                    counts,
                    metrics,
                    macro_metrics,
                    folds: Vec::new(),
                });
            } else {
                let fold = int(5)?;
                let row = r.rows.last_mut().ok_or_else(|| bad(i, "fold line before its row".into()))?;
                row.folds.push(FoldResult { fold, counts, metrics });
            }
        }
        report.ok_or_else(|| bad(0, "no rows".into()))
    }
}

const CSV_HEADER: &str = "experiment,dataset,seed,method,combination,fold,precision,recall,f_measure,\
macro_precision,macro_recall,macro_f_measure,tp,fp,tn,fn";
const CSV_COLUMNS: usize = 16;

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn split_csv(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            '"' => quoted = !quoted,
            ',' if !quoted => out.push(std::mem::take(&mut cur)),
            c => cur.push(c),
        }
    }
    out.push(cur);
    out
}

fn table(header: &[&str], rows: &[Vec<String>], markdown: bool) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        if markdown {
            format!("| {} |", padded.join(" | "))
        } else {
            padded.join("  ").trim_end().to_string()
        }
    };
    let mut out = String::new();
    let head: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    out.push_str(&line(&head));
    out.push('\n');
    if markdown {
        let sep: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&format!("|-{}-|", sep.join("-|-")));
    } else {
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            let mut emit = |fold: &str, row: &EvalRow, c: &ConfusionCounts, m: &Metrics, mm: &Metrics| {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{fold},{},{},{},{},{},{},{},{},{},{}",
                    csv_field(&report.experiment_id),
                    csv_field(&report.dataset.name),
                    report.seed,
                    csv_field(&row.method),
                    csv_field(&row.combination),
                    m.precision,
                    m.recall,
                    m.f_measure,
                    mm.precision,
                    mm.recall,
                    mm.f_measure,
                    c.tp,
                    c.fp,
                    c.tn,
                    c.fn_
                );
            };
            for row in &report.rows {
                emit("all", row, &row.counts, &row.metrics, &row.macro_metrics);
                for f in &row.folds {
                    emit(&f.fold.to_string(), row, &f.counts, &f.metrics, &f.metrics);
                }
            }
            out
        }
        ReportFormat::PlainTable | ReportFormat::MarkdownTable => {
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.method.clone(),
                        r.combination.clone(),
                        format!("{:.2}", r.metrics.precision),
                        format!("{:.2}", r.metrics.recall),
                        format!("{:.2}", r.metrics.f_measure),
                    ]
                })
                .collect();
            let body = table(
                &["Method", "Patterns", "Precision", "Recall", "F-measure"],
                &rows,
                format == ReportFormat::MarkdownTable,
            );
            if format == ReportFormat::MarkdownTable {
                body
            } else {
                format!(
                    "{} on {} ({} reports, {} positive), seed {}\n{body}",
                    report.experiment_id, report.dataset.name, report.dataset.reports, report.dataset.positives, report.seed
                )
            }
        }
    }
}

/// Saturation curve as one row per iteration.
pub fn render_saturation(curve: &SaturationCurve, format: ReportFormat) -> String {
    let header = [
        "Iteration", "Unit", "Sentences", "Entries", "New entries", "Patterns", "New patterns", "Recall KW", "Recall PH",
        "Recall SE", "Recall BR",
    ];
    let recall = |m: &std::collections::BTreeMap<Level, f64>, l: Level, full: bool| {
        let v = m.get(&l).copied().unwrap_or(0.0);
        if full { v.to_string() } else { format!("{v:.2}") }
    };
    let full = format == ReportFormat::Csv;
    let mut rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|p| {
            let mut r = vec![
                p.iteration.to_string(),
                p.unit_label.clone(),
                p.sentences_seen.to_string(),
                p.total_entries.to_string(),
                p.new_entries.to_string(),
                p.total_patterns.to_string(),
                p.new_patterns.to_string(),
            ];
            r.extend(Level::ALL.iter().map(|l| recall(&p.recall, *l, full)));
            r
        })
        .collect();
    let mut last = vec!["full".to_string(), "shipped set".to_string()];
    last.extend(std::iter::repeat_n(String::new(), 5));
    last.extend(Level::ALL.iter().map(|l| recall(&curve.full_recall, *l, full)));
    rows.push(last);
    match format {
        ReportFormat::Csv => {
            let mut out = header.iter().map(|h| h.to_lowercase().replace(' ', "_")).collect::<Vec<_>>().join(",");
            out.push('\n');
            for r in rows {
                out.push_str(&r.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
            out
        }
        _ => table(&header, &rows, format == ReportFormat::MarkdownTable),
    }
}
