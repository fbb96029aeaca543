// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures and independent reference implementations.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use lingpat::corpus::{load_dataset, load_sentence_labels, Dataset, InputFormat, SentenceLabel};
use lingpat::lexicon::{CategoryAbbr, Lexicon};
use lingpat::patterns::{category_units, Level, MatchReport, PatternSet, SentenceKind, Slot, Template, Topic, Unit};
use lingpat::textproc::{Pos, ProcessedSentence};

pub fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn mini_corpus() -> Dataset {
    load_dataset(data_path("mini_corpus.jsonl"), InputFormat::Jsonl).unwrap().dataset
}

pub fn mini_sentence_labels() -> Vec<SentenceLabel> {
    load_sentence_labels(data_path("mini_corpus_sentences.jsonl")).unwrap()
}

pub fn fixtures() -> Dataset {
    load_dataset(data_path("fixtures/motivating.jsonl"), InputFormat::Jsonl).unwrap().dataset
}

/// Level-by-level hit sets in a shape both the engine and the oracle can
/// produce: word and phrase hits as `(pattern, sentence)`, sentence hits
/// with their negation flag, bug-report hits as pattern ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HitSets {
    pub word: BTreeSet<(String, usize)>,
    pub phrase: BTreeSet<(String, usize)>,
    pub sentence: BTreeSet<(String, usize, bool)>,
    pub br: BTreeSet<String>,
}

impl HitSets {
    pub fn of(report: &MatchReport) -> HitSets {
        let pairs = |level| report.hits(level).iter().map(|h| (h.pattern_id.clone(), h.sentence_index)).collect();
        HitSets {
            word: pairs(Level::Word),
            phrase: pairs(Level::Phrase),
            sentence: report
                .hits(Level::Sentence)
                .iter()
                .map(|h| (h.pattern_id.clone(), h.sentence_index, h.negated))
                .collect(),
            br: report.hits(Level::BugReport).iter().map(|h| h.pattern_id.clone()).collect(),
        }
    }

    pub fn flagged(&self, level: Level) -> bool {
        match level {
            Level::Word => !self.word.is_empty(),
            Level::Phrase => !self.phrase.is_empty(),
            Level::Sentence => !self.sentence.is_empty(),
            Level::BugReport => !self.br.is_empty(),
        }
    }
}

fn admits(slot: &Slot, u: &Unit) -> bool {
    u.pos == slot.pos && u.categories.contains(&slot.category) && slot.filter.as_ref().is_none_or(|f| f.contains(&u.lemma))
}

fn word_matches(term: &[String], s: &ProcessedSentence) -> bool {
    let text = format!(" {} ", s.tokens.iter().map(|t| t.lemma.to_lowercase()).collect::<Vec<_>>().join(" "));
    text.contains(&format!(" {} ", term.join(" ")))
}

/// Every increasing tuple of units, checked against every slot ordering.
fn phrase_matches(slots: &[Slot], max_gap: usize, units: &[Unit]) -> bool {
    let k = slots.len();
    let n = units.len();
    if n < k {
        return false;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let tuple: Vec<&Unit> = idx.iter().map(|&i| &units[i]).collect();
        let gaps_ok = tuple.windows(2).all(|w| w[1].start >= w[0].end && w[1].start - w[0].end <= max_gap);
        if gaps_ok && permutations(k).iter().any(|perm| perm.iter().enumerate().all(|(j, &s)| admits(&slots[s], tuple[j]))) {
            return true;
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return false;
            }
            pos -= 1;
            if idx[pos] < n - k + pos {
                break;
            }
        }
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, k - 1);
            out.push(q);
        }
    }
    out
}

/// A NEG unit starting within three tokens before `token`, crossing only
/// adverbs and untagged words.
fn negated(s: &ProcessedSentence, units: &[Unit], token: usize) -> bool {
    let mut j = token;
    for _ in 0..3 {
        if j == 0 {
            return false;
        }
        j -= 1;
        if units.iter().any(|u| u.start == j && u.categories.contains(&CategoryAbbr::NEG)) {
            return true;
        }
        if !matches!(s.tokens[j].pos, Pos::Other | Pos::Adv) {
            return false;
        }
    }
    false
}

/// Matches one pattern against one sentence at a time, with no shared state
/// between patterns. Units come from the lexicon layer; everything above it
/// is recomputed here.
pub fn oracle_hits(sentences: &[ProcessedSentence], lexicon: &Lexicon, patterns: &PatternSet) -> HitSets {
    let mut out = HitSets::default();
    let mut topics: Vec<Topic> = Vec::new();
    for p in patterns.patterns() {
        for s in sentences {
            let units = category_units(s, lexicon);
            match &p.template {
                Template::Word(t) => {
                    if word_matches(&t.term, s) {
                        out.word.insert((p.id.clone(), s.index));
                    }
                }
                Template::Phrase(t) => {
                    if phrase_matches(&t.slots, t.max_gap, &units) {
                        out.phrase.insert((p.id.clone(), s.index));
                    }
                }
                Template::Sentence(t) => {
                    if t.kind == SentenceKind::Action && s.text.trim_end().ends_with('?') {
                        continue;
                    }
                    let witnesses: Option<Vec<&Unit>> =
                        t.required.iter().map(|slot| units.iter().find(|u| admits(slot, u))).collect();
                    let Some(witnesses) = witnesses else { continue };
                    if t.forbidden.iter().any(|slot| units.iter().any(|u| admits(slot, u))) {
                        continue;
                    }
                    let verbs: Vec<&&Unit> = witnesses.iter().filter(|u| u.pos == Pos::Verb).collect();
                    let neg = !verbs.is_empty() && verbs.iter().all(|u| negated(s, &units, u.start));
                    out.sentence.insert((p.id.clone(), s.index, neg));
                    if !neg && t.topic != Topic::Other {
                        topics.push(t.topic);
                    }
                }
                Template::BugReport(_) => {}
            }
        }
    }
    for p in patterns.level(Level::BugReport) {
        let Template::BugReport(t) = &p.template else { continue };
        if topics.iter().filter(|topic| t.topics.contains(topic)).count() >= t.min_sentence_matches {
            out.br.insert(p.id.clone());
        }
    }
    out
}

/// A synthetic corpus of `reports` reports with at most `max_sentences`
/// processed sentences in total. Bodies are trimmed from the end of the
/// corpus backwards until the budget holds.
pub fn bounded_corpus(
    seed: u64,
    reports: usize,
    max_sentences: usize,
    processor: &lingpat::textproc::TextProcessor,
) -> (Dataset, Vec<Vec<ProcessedSentence>>) {
    let config = lingpat::synth::SynthConfig {
        reports,
        positive_fraction: 0.3,
        seed,
        min_body_sentences: 1,
        max_body_sentences: 2,
        ..Default::default()
    };
    let dataset = lingpat::synth::generate(&config).dataset;
    let mut sentences: Vec<Vec<ProcessedSentence>> = dataset.reports.iter().map(|r| processor.process_report(r)).collect();
    let mut total: usize = sentences.iter().map(Vec::len).sum();
    for s in sentences.iter_mut().rev() {
        while total > max_sentences && s.len() > 1 {
            s.pop();
            total -= 1;
        }
    }
    assert!(total <= max_sentences, "{total} sentences");
    (dataset, sentences)
}
