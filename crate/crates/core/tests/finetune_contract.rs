// SPDX-License-Identifier: Apache-2.0

//! The fine-tuning export is consumed by a separate training script, so its
//! bytes are pinned: `finetune_expected.jsonl` is the export of
//! `finetune_input.jsonl` under the built-in lexicon and pattern set, and
//! its digest is recorded next to it for the consumer to check.

mod common;

use std::path::PathBuf;

use sha2::{Digest, Sha256};

use common::data_path;
use lingpat::corpus::{load_dataset, Dataset, InputFormat, Label};
use lingpat::llmbridge::{export_finetune_file, finetune_record, load_finetune_file, FinetuneRecord, LlmError};
use lingpat::pipeline::Pipeline;

const EXPECTED_SHA256: &str = "ca8f0032c3b8d8990ae00aa79f2bf98aaf13ab87301de9f542878616d2c6de38";

const MARKERS: [&str; 5] = ["[PATTERN:WORD]", "[PATTERN:PHRASE]", "[PATTERN:SENTENCE]", "[PATTERN:BUG REPORT]", "[BUG REPORT]"];

fn fixture(name: &str) -> PathBuf {
    data_path("fixtures").join(name)
}

fn input() -> Dataset {
    load_dataset(fixture("finetune_input.jsonl"), InputFormat::Jsonl).unwrap().dataset
}

fn export(dataset: &Dataset) -> Vec<u8> {
    let pipeline = Pipeline::default_pipeline();
    let matches = pipeline.match_dataset(dataset, 1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.jsonl");
    let n = export_finetune_file(dataset, &matches, pipeline.patterns(), &path).unwrap();
    assert_eq!(n, dataset.len());
    std::fs::read(path).unwrap()
}

#[test]
fn fixture_digest_is_pinned() {
    let bytes = std::fs::read(fixture("finetune_expected.jsonl")).unwrap();
    let digest = hex::encode(Sha256::digest(&bytes));
    assert_eq!(digest, EXPECTED_SHA256);
    let recorded = std::fs::read_to_string(fixture("finetune_expected.sha256")).unwrap();
    assert_eq!(recorded.trim(), EXPECTED_SHA256);
}

#[test]
fn export_reproduces_fixture_bytes() {
    let expected = std::fs::read(fixture("finetune_expected.jsonl")).unwrap();
    let got = export(&input());
    assert_eq!(String::from_utf8(got).unwrap(), String::from_utf8(expected).unwrap());
}

/// Splits `text` on the fixed markers without reference to the exporter.
fn parse_text(text: &str) -> (Vec<String>, String) {
    let inner = text.strip_prefix("[CLS]").and_then(|t| t.strip_suffix("[SEP]")).expect("CLS ... SEP framing");
    let mut rest = inner;
    let mut contents = Vec::new();
    for (i, m) in MARKERS.iter().enumerate() {
        let at = rest.find(m).unwrap_or_else(|| panic!("{m} missing"));
        if i > 0 {
            contents.push(rest[..at].trim().to_string());
        } else {
            assert_eq!(&rest[..at], " ");
        }
        rest = &rest[at + m.len()..];
    }
    (contents, rest.trim().to_string())
}

#[test]
fn records_follow_the_text_layout() {
    let dataset = input();
    let records = load_finetune_file(&fixture("finetune_expected.jsonl")).unwrap();
    assert_eq!(records.len(), dataset.len());
    let mut blocks_seen = [false; 4];
    for (rec, report) in records.iter().zip(&dataset.reports) {
        assert_eq!(rec.id, report.id);
        assert_eq!(rec.label, u8::from(report.label == Label::Concurrency));
        let joined = format!("{} {}", report.title, report.body);
        assert_eq!(rec.report, joined.split_whitespace().collect::<Vec<_>>().join(" "));
        assert!(!rec.text.contains("  "), "double space in {}", rec.id);
        let (contents, tail) = parse_text(&rec.text);
        assert_eq!(contents, [rec.word.as_str(), &rec.phrase, &rec.sentence, &rec.bug_report]);
        assert_eq!(tail, rec.report);
        for (seen, c) in blocks_seen.iter_mut().zip(&contents) {
            *seen |= !c.is_empty();
        }
    }
    assert_eq!(blocks_seen, [true; 4], "fixture should exercise every block");
    assert!(records.iter().any(|r| r.word.is_empty() && r.bug_report.is_empty()));
}

#[test]
fn loaded_records_equal_fresh_records() {
    let dataset = input();
    let pipeline = Pipeline::default_pipeline();
    let fresh: Vec<FinetuneRecord> = dataset
        .reports
        .iter()
        .map(|r| finetune_record(r, &pipeline.match_one(r), pipeline.patterns()).unwrap())
        .collect();
    assert_eq!(load_finetune_file(&fixture("finetune_expected.jsonl")).unwrap(), fresh);
}

#[test]
fn unlabeled_reports_are_rejected() {
    let mut dataset = input();
    dataset.reports[1].label = Label::Unlabeled;
    let pipeline = Pipeline::default_pipeline();
    let matches = pipeline.match_dataset(&dataset, 1);
    let dir = tempfile::tempdir().unwrap();
    let err = export_finetune_file(&dataset, &matches, pipeline.patterns(), &dir.path().join("x.jsonl")).unwrap_err();
    assert!(matches!(err, LlmError::UnlabeledData(ref id) if id == "MOT-FAIRNESS"), "{err}");
}
