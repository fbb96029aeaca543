// SPDX-License-Identifier: Apache-2.0

//! Rule-mode matching of all four levels, with optional LLM adjudication of
//! sentence and bug-report candidates.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Level, PatternSet, SentenceKind, Slot, Template};
use crate::lexicon::{CategoryAbbr, Lexicon};
use crate::llmbridge::{parse_verdict, Verdict};
use crate::textproc::{Pos, ProcessedSentence};

/// How far back (in tokens) a negation may sit before the verb it governs.
pub const NEGATION_WINDOW: usize = 3;

/// A contiguous token run carrying word categories: a single categorized
/// token or a multi-word lexicon entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    /// Token range `[start, end)`.
    pub start: usize,
    pub end: usize,
    pub lemma: String,
    pub pos: Pos,
    pub categories: BTreeSet<CategoryAbbr>,
    /// Character span in the sentence.
    pub span: (usize, usize),
}

/// Categorized units of a sentence, left to right. Multi-word entries are
/// matched longest first and their tokens do not form units of their own.
pub fn category_units(sentence: &ProcessedSentence, lexicon: &Lexicon) -> Vec<Unit> {
    let tokens = &sentence.tokens;
    let max = lexicon.max_phrase_len().min(tokens.len());
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < tokens.len() {
        for len in (2..=max.min(tokens.len() - i)).rev() {
            let run = &tokens[i..i + len];
            if run.iter().any(|t| t.pos == Pos::Api || t.pos == Pos::Other) {
                continue;
            }
            let lemmas: Vec<&str> = run.iter().map(|t| t.lemma.as_str()).collect();
            let head = run[len - 1].pos;
            let categories = lexicon.categorize_phrase(&lemmas, head);
            if !categories.is_empty() {
                out.push(Unit {
                    start: i,
                    end: i + len,
                    lemma: lemmas.join(" ").to_lowercase(),
                    pos: head,
                    categories,
                    span: (run[0].span.0, run[len - 1].span.1),
                });
                i += len;
                continue 'outer;
            }
        }
        let t = &tokens[i];
        if t.pos != Pos::Other {
            let categories = lexicon.categorize(&t.lemma, t.pos);
            if !categories.is_empty() {
                out.push(Unit {
                    start: i,
                    end: i + 1,
                    lemma: if t.pos == Pos::Api { t.lemma.clone() } else { t.lemma.to_lowercase() },
                    pos: t.pos,
                    categories,
                    span: t.span,
                });
            }
        }
        i += 1;
    }
    out
}

/// One pattern occurrence with its evidence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Hit {
    pub pattern_id: String,
    pub sentence_index: usize,
    /// Character span `[start, end)` in the sentence text.
    pub span: (usize, usize),
    /// Matched lemmas in sentence order; for bug-report hits, the
    /// contributing sentence pattern ids.
    pub terms: Vec<String>,
    /// Sentence hits only: every matched verb sits under a negation.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    pub report_id: String,
    pub pattern_set_hash: String,
    pub word_hits: Vec<Hit>,
    pub phrase_hits: Vec<Hit>,
    pub sentence_hits: Vec<Hit>,
    pub br_hits: Vec<Hit>,
    pub matched_levels: BTreeSet<Level>,
}

impl MatchReport {
    pub fn empty(report_id: impl Into<String>, patterns: &PatternSet) -> MatchReport {
        MatchReport {
            report_id: report_id.into(),
            pattern_set_hash: patterns.layout_hash(),
            word_hits: Vec::new(),
            phrase_hits: Vec::new(),
            sentence_hits: Vec::new(),
            br_hits: Vec::new(),
            matched_levels: BTreeSet::new(),
        }
    }

    pub fn hits(&self, level: Level) -> &[Hit] {
        match level {
            Level::Word => &self.word_hits,
            Level::Phrase => &self.phrase_hits,
            Level::Sentence => &self.sentence_hits,
            Level::BugReport => &self.br_hits,
        }
    }

    pub fn has_level(&self, level: Level) -> bool {
        !self.hits(level).is_empty()
    }

    pub fn all_hits(&self) -> impl Iterator<Item = &Hit> {
        Level::ALL.into_iter().flat_map(move |l| self.hits(l).iter())
    }

    /// Distinct pattern ids with at least one hit.
    pub fn hit_ids(&self) -> BTreeSet<&str> {
        self.all_hits().map(|h| h.pattern_id.as_str()).collect()
    }

    fn finish(mut self) -> MatchReport {
        self.matched_levels = Level::ALL.into_iter().filter(|l| self.has_level(*l)).collect();
        self
    }
}

#[derive(Debug, Error)]
pub enum AdjudicatorError {
    #[error("adjudicator unavailable: {0}")]
    AdjudicatorUnavailable(String),
}

/// A text-completion backend used to confirm rule-mode candidates.
pub trait Adjudicator {
    fn complete(&self, prompt: &str) -> Result<String, AdjudicatorError>;
}

pub struct Matcher {
    lexicon: Lexicon,
    guard: Lexicon,
    patterns: PatternSet,
    hash: String,
}

impl Matcher {
    pub fn new(lexicon: Lexicon, patterns: PatternSet) -> Matcher {
        let guard = lexicon.clone();
        Matcher::with_guard(lexicon, guard, patterns)
    }

    /// Matcher whose forbidden-slot and negation checks use `guard` instead
    /// of the matching lexicon. Used when matching with a partial lexicon.
    pub fn with_guard(lexicon: Lexicon, guard: Lexicon, patterns: PatternSet) -> Matcher {
        let hash = patterns.layout_hash();
        Matcher {
            lexicon,
            guard,
            patterns,
            hash,
        }
    }

    pub fn patterns(&self) -> &PatternSet {
        &self.patterns
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// Rule-mode match of every level.
    pub fn match_report(&self, report_id: &str, sentences: &[ProcessedSentence]) -> MatchReport {
        let sentence_hits = self.match_sentence_level(sentences);
        MatchReport {
            report_id: report_id.to_string(),
            pattern_set_hash: self.hash.clone(),
            word_hits: self.match_word_level(sentences),
            phrase_hits: self.match_phrase_level(sentences),
            br_hits: aggregate_bug_reports(&sentence_hits, &self.patterns),
            sentence_hits,
            matched_levels: BTreeSet::new(),
        }
        .finish()
    }

    /// Rule-mode candidates confirmed by an adjudicator. A sentence candidate
    /// survives only if the reply names its template exactly; a bug-report
    /// candidate survives only on a yes verdict.
    pub fn match_report_adjudicated(
        &self,
        report_id: &str,
        report_text: &str,
        sentences: &[ProcessedSentence],
        adjudicator: &dyn Adjudicator,
    ) -> Result<MatchReport, AdjudicatorError> {
        let vocabulary: Vec<&str> = self.patterns.level(Level::Sentence).filter_map(|p| p.name()).collect();
        let mut confirmed = Vec::new();
        for hit in self.match_sentence_level(sentences) {
            let name = self
                .patterns
                .get(&hit.pattern_id)
                .and_then(|p| p.name())
                .expect("sentence hit refers to a sentence template");
            let sentence = &sentences
                .iter()
                .find(|s| s.index == hit.sentence_index)
                .expect("hit sentence exists")
                .text;
            let reply = adjudicator.complete(&sentence_prompt(sentence, name, &vocabulary))?;
            if normalize_name(&reply) == normalize_name(name) {
                confirmed.push(hit);
            }
        }
        let mut br_hits = Vec::new();
        for hit in aggregate_bug_reports(&confirmed, &self.patterns) {
            let name = self.patterns.get(&hit.pattern_id).and_then(|p| p.name()).unwrap_or_default();
            let evidence: Vec<&str> = confirmed
                .iter()
                .filter(|h| hit.terms.contains(&h.pattern_id))
                .filter_map(|h| sentences.iter().find(|s| s.index == h.sentence_index))
                .map(|s| s.text.as_str())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let reply = adjudicator.complete(&root_cause_prompt(report_text, &evidence, name))?;
            if parse_verdict(&reply) == Verdict::Yes {
                br_hits.push(hit);
            }
        }
        Ok(MatchReport {
            report_id: report_id.to_string(),
            pattern_set_hash: self.hash.clone(),
            word_hits: self.match_word_level(sentences),
            phrase_hits: self.match_phrase_level(sentences),
            sentence_hits: confirmed,
            br_hits,
            matched_levels: BTreeSet::new(),
        }
        .finish())
    }

    pub fn match_word_level(&self, sentences: &[ProcessedSentence]) -> Vec<Hit> {
        let mut hits = Vec::new();
        for s in sentences {
            let lemmas: Vec<String> = s.tokens.iter().map(|t| t.lemma.to_lowercase()).collect();
            for p in self.patterns.level(Level::Word) {
                let Template::Word(t) = &p.template else { continue };
                let len = t.term.len();
                if len > lemmas.len() {
                    continue;
                }
                for i in 0..=lemmas.len() - len {
                    if lemmas[i..i + len] == t.term[..] {
                        hits.push(Hit {
                            pattern_id: p.id.clone(),
                            sentence_index: s.index,
                            span: (s.tokens[i].span.0, s.tokens[i + len - 1].span.1),
                            terms: vec![t.term.join(" ")],
                            negated: false,
                        });
                    }
                }
            }
        }
        self.sorted(hits)
    }

    pub fn match_phrase_level(&self, sentences: &[ProcessedSentence]) -> Vec<Hit> {
        let mut hits = Vec::new();
        for s in sentences {
            let units = category_units(s, &self.lexicon);
            for p in self.patterns.level(Level::Phrase) {
                let Template::Phrase(t) = &p.template else { continue };
                let candidates: Vec<Vec<usize>> = t
                    .slots
                    .iter()
                    .map(|slot| (0..units.len()).filter(|&i| slot.admits(&units[i])).collect())
                    .collect();
                let mut found = BTreeSet::new();
                let mut chosen = Vec::with_capacity(t.slots.len());
                combine(&candidates, &mut chosen, &mut |combo| {
                    let mut picked: Vec<&Unit> = combo.iter().map(|&i| &units[i]).collect();
                    picked.sort_by_key(|u| u.start);
                    let fits = picked
                        .windows(2)
                        .all(|w| w[1].start >= w[0].end && w[1].start - w[0].end <= t.max_gap);
                    if fits {
                        found.insert((
                            (picked[0].span.0, picked.iter().map(|u| u.span.1).max().unwrap_or(0)),
                            picked.iter().map(|u| u.lemma.clone()).collect::<Vec<_>>(),
                        ));
                    }
                });
                for (span, terms) in found {
                    hits.push(Hit {
                        pattern_id: p.id.clone(),
                        sentence_index: s.index,
                        span,
                        terms,
                        negated: false,
                    });
                }
            }
        }
        self.sorted(hits)
    }

    pub fn match_sentence_level(&self, sentences: &[ProcessedSentence]) -> Vec<Hit> {
        let mut hits = Vec::new();
        for s in sentences {
            let units = category_units(s, &self.lexicon);
            let guard_units = category_units(s, &self.guard);
            let question = s.is_question();
            for p in self.patterns.level(Level::Sentence) {
                let Template::Sentence(t) = &p.template else { continue };
                if question && t.kind == SentenceKind::Action {
                    continue;
                }
                let witnesses: Option<Vec<&Unit>> = t
                    .required
                    .iter()
                    .map(|slot| units.iter().find(|u| slot.admits(u)))
                    .collect();
                let Some(witnesses) = witnesses else { continue };
                if forbidden_present(&t.forbidden, &guard_units) {
                    continue;
                }
                let verbs: Vec<&&Unit> = witnesses.iter().filter(|u| u.pos == Pos::Verb).collect();
                let negated = !verbs.is_empty() && verbs.iter().all(|u| self.is_negated(s, &guard_units, u.start));
                let start = witnesses.iter().map(|u| u.span.0).min().unwrap_or(0);
                let end = witnesses.iter().map(|u| u.span.1).max().unwrap_or(0);
                hits.push(Hit {
                    pattern_id: p.id.clone(),
                    sentence_index: s.index,
                    span: (start, end),
                    terms: witnesses.iter().map(|u| u.lemma.clone()).collect(),
                    negated,
                });
            }
        }
        self.sorted(hits)
    }

    /// A NEG word within the window before `token`, with only function words
    /// and adverbs in between.
    fn is_negated(&self, s: &ProcessedSentence, guard_units: &[Unit], token: usize) -> bool {
        let neg_starts: HashSet<usize> = guard_units
            .iter()
            .filter(|u| u.categories.contains(&CategoryAbbr::NEG))
            .map(|u| u.start)
            .collect();
        for j in (token.saturating_sub(NEGATION_WINDOW)..token).rev() {
            if neg_starts.contains(&j) {
                return true;
            }
            if !matches!(s.tokens[j].pos, Pos::Other | Pos::Adv) {
                return false;
            }
        }
        false
    }

    fn sorted(&self, mut hits: Vec<Hit>) -> Vec<Hit> {
        sort_hits(&mut hits, &self.patterns);
        hits.dedup();
        hits
    }
}

fn forbidden_present(forbidden: &[Slot], units: &[Unit]) -> bool {
    forbidden.iter().any(|slot| units.iter().any(|u| slot.admits(u)))
}

/// Visit every assignment of distinct candidates to slots.
fn combine(candidates: &[Vec<usize>], chosen: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if chosen.len() == candidates.len() {
        visit(chosen);
        return;
    }
    for &c in &candidates[chosen.len()] {
        if chosen.contains(&c) {
            continue;
        }
        chosen.push(c);
        combine(candidates, chosen, visit);
        chosen.pop();
    }
}

fn sort_hits(hits: &mut [Hit], patterns: &PatternSet) {
    hits.sort_by(|a, b| {
        let ka = (a.sentence_index, patterns.index_of(&a.pattern_id), a.span, &a.terms);
        let kb = (b.sentence_index, patterns.index_of(&b.pattern_id), b.span, &b.terms);
        ka.cmp(&kb)
    });
}

/// Bug-report hits implied by a set of sentence hits. A template fires when
/// at least `min_sentence_matches` non-negated sentence hits carry one of
/// its topics; `Other`-topic hits never contribute.
pub fn aggregate_bug_reports(sentence_hits: &[Hit], patterns: &PatternSet) -> Vec<Hit> {
    let mut ordered = sentence_hits.to_vec();
    sort_hits(&mut ordered, patterns);
    let mut out = Vec::new();
    for p in patterns.level(Level::BugReport) {
        let Template::BugReport(t) = &p.template else { continue };
        let contributing: Vec<&Hit> = ordered
            .iter()
            .filter(|h| !h.negated)
            .filter(|h| {
                patterns
                    .sentence_template(&h.pattern_id)
                    .is_some_and(|st| st.topic != super::Topic::Other && t.topics.contains(&st.topic))
            })
            .collect();
        if contributing.len() >= t.min_sentence_matches {
            let first = contributing[0];
            let mut ids: Vec<String> = Vec::new();
            for h in &contributing {
                if !ids.contains(&h.pattern_id) {
                    ids.push(h.pattern_id.clone());
                }
            }
            out.push(Hit {
                pattern_id: p.id.clone(),
                sentence_index: first.sentence_index,
                span: first.span,
                terms: ids,
                negated: false,
            });
        }
    }
    out
}

fn normalize_name(s: &str) -> String {
    let first = s.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    first
        .trim()
        .trim_matches(|c: char| !c.is_alphanumeric())
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn sentence_prompt(sentence: &str, candidate: &str, vocabulary: &[&str]) -> String {
    format!(
        "Classify the sentence from a software bug report into one sentence-level pattern.\n\
         Allowed answers: {}; None.\n\
         Candidate: {candidate}\n\
         Reply with the candidate name if the sentence matches it, otherwise reply None. \
         Reply with the name only.\n\
         [sentence] {sentence}\n\
         [pattern]:",
        vocabulary.join("; ")
    )
}

fn root_cause_prompt(report_text: &str, evidence: &[&str], category: &str) -> String {
    let mut prompt = format!(
        "Decide whether the sentences below describe the root cause of the bug report.\n\
         Category: {category}\n"
    );
    for s in evidence {
        prompt.push_str("[sentence] ");
        prompt.push_str(s);
        prompt.push('\n');
    }
    prompt.push_str("[bug report] ");
    prompt.push_str(&report_text.split_whitespace().collect::<Vec<_>>().join(" "));
    prompt.push_str("\nAnswer Yes or No.\n[Root cause or not]:");
    prompt
}
