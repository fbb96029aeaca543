// SPDX-License-Identifier: Apache-2.0

//! Four-level linguistic pattern set: word keywords, phrase co-occurrence
//! templates, sentence templates and bug-report aggregation rules.

mod matcher;
mod mining;
mod parse;
mod saturation;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use matcher::{
    aggregate_bug_reports, category_units, Adjudicator, AdjudicatorError, Hit, MatchReport, Matcher, Unit,
};
pub use mining::{mine_phrase_candidates, MiningError, PhraseCandidate};
pub use parse::PatternParseError;
pub use saturation::{
    heldout_recall, saturation_curve, SaturationConfig, SaturationCurve, SaturationError, SaturationPoint,
    SaturationUnit,
};

use crate::lexicon::CategoryAbbr;
use crate::textproc::Pos;

const DEFAULT_PATTERNS: &str = include_str!("../../data/patterns.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Word,
    Phrase,
    Sentence,
    BugReport,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::Word, Level::Phrase, Level::Sentence, Level::BugReport];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Word => "word",
            Level::Phrase => "phrase",
            Level::Sentence => "sentence",
            Level::BugReport => "bug report",
        }
    }

    /// Short tag used in combination names such as `KW+PH+SE+BR`.
    pub fn short(self) -> &'static str {
        match self {
            Level::Word => "KW",
            Level::Phrase => "PH",
            Level::Sentence => "SE",
            Level::BugReport => "BR",
        }
    }

    fn from_id(id: &str) -> Option<Level> {
        Level::ALL.into_iter().find(|l| id.starts_with(l.short()))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['_', '-'], " ").as_str() {
            "word" | "kw" | "keyword" => Ok(Level::Word),
            "phrase" | "ph" => Ok(Level::Phrase),
            "sentence" | "se" => Ok(Level::Sentence),
            "bug report" | "bugreport" | "br" | "report" => Ok(Level::BugReport),
            other => Err(format!("unknown level {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Topic {
    Lock,
    Thread,
    Race,
    Atomicity,
    Sync,
    Other,
}

impl FromStr for Topic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lock" => Ok(Topic::Lock),
            "thread" => Ok(Topic::Thread),
            "race" => Ok(Topic::Race),
            "atomicity" => Ok(Topic::Atomicity),
            "sync" | "synchronization" => Ok(Topic::Sync),
            "other" => Ok(Topic::Other),
            other => Err(format!("unknown topic {other:?}")),
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Whether a sentence template describes an action, a symptom or context.
/// Action templates never match questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentenceKind {
    Action,
    Symptom,
    Context,
}

impl FromStr for SentenceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "action" => Ok(SentenceKind::Action),
            "symptom" => Ok(SentenceKind::Symptom),
            "context" => Ok(SentenceKind::Context),
            other => Err(format!("unknown sentence kind {other:?}")),
        }
    }
}

impl fmt::Display for SentenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SentenceKind::Action => "action",
            SentenceKind::Symptom => "symptom",
            SentenceKind::Context => "context",
        })
    }
}

/// A `CAT:POS` requirement, optionally limited to specific lemmas.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub category: CategoryAbbr,
    pub pos: Pos,
    pub filter: Option<BTreeSet<String>>,
}

impl Slot {
    pub fn new(category: CategoryAbbr, pos: Pos) -> Slot {
        Slot {
            category,
            pos,
            filter: None,
        }
    }

    pub fn admits(&self, unit: &Unit) -> bool {
        unit.pos == self.pos
            && unit.categories.contains(&self.category)
            && self.filter.as_ref().is_none_or(|f| f.contains(&unit.lemma))
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.category, self.pos)?;
        if let Some(filter) = &self.filter {
            let items: Vec<&str> = filter.iter().map(String::as_str).collect();
            write!(f, "{{{}}}", items.join("|"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordTemplate {
    /// Lowercase lemma sequence.
    pub term: Vec<String>,
    pub category: CategoryAbbr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseTemplate {
    /// Two or three slots.
    pub slots: Vec<Slot>,
    pub max_gap: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceTemplate {
    pub name: String,
    pub required: Vec<Slot>,
    pub forbidden: Vec<Slot>,
    pub topic: Topic,
    pub kind: SentenceKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugReportTemplate {
    pub name: String,
    pub topics: BTreeSet<Topic>,
    pub min_sentence_matches: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Template {
    Word(WordTemplate),
    Phrase(PhraseTemplate),
    Sentence(SentenceTemplate),
    BugReport(BugReportTemplate),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinguisticPattern {
    pub id: String,
    pub level: Level,
    pub template: Template,
    pub description: String,
    /// Exemplar text shown in prompts.
    pub example: String,
}

impl LinguisticPattern {
    /// Numeric part of the id, used for ordering within a level.
    pub fn ordinal(&self) -> u32 {
        self.id
            .trim_start_matches(|c: char| c.is_ascii_alphabetic())
            .parse()
            .unwrap_or(0)
    }

    pub fn name(&self) -> Option<&str> {
        match &self.template {
            Template::Sentence(t) => Some(&t.name),
            Template::BugReport(t) => Some(&t.name),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PatternSetError {
    #[error(transparent)]
    Parse(#[from] PatternParseError),
    #[error("cannot read pattern set {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("duplicate pattern id {0}")]
    DuplicateId(String),
    #[error("pattern {id}: {message}")]
    Invalid { id: String, message: String },
}

/// An ordered, validated pattern collection. Patterns are sorted by level,
/// then by the numeric part of their id; that order is the feature layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    pub version: String,
    patterns: Vec<LinguisticPattern>,
}

impl PatternSet {
    pub fn new(version: impl Into<String>, mut patterns: Vec<LinguisticPattern>) -> Result<PatternSet, PatternSetError> {
        patterns.sort_by(|a, b| (a.level, a.ordinal(), &a.id).cmp(&(b.level, b.ordinal(), &b.id)));
        let mut ids = BTreeSet::new();
        for p in &patterns {
            if !ids.insert(p.id.clone()) {
                return Err(PatternSetError::DuplicateId(p.id.clone()));
            }
            validate(p)?;
        }
        Ok(PatternSet {
            version: version.into(),
            patterns,
        })
    }

    /// The pattern set shipped with the crate.
    pub fn default_set() -> PatternSet {
        PatternSet::parse(DEFAULT_PATTERNS).expect("bundled pattern set is valid")
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<PatternSet, PatternSetError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PatternSetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        PatternSet::parse(&text)
    }

    pub fn patterns(&self) -> &[LinguisticPattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&LinguisticPattern> {
        self.patterns.iter().find(|p| p.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.patterns.iter().position(|p| p.id == id)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.patterns.iter().map(|p| p.id.as_str()).collect()
    }

    pub fn level(&self, level: Level) -> impl Iterator<Item = &LinguisticPattern> {
        self.patterns.iter().filter(move |p| p.level == level)
    }

    pub fn count(&self, level: Level) -> usize {
        self.level(level).count()
    }

    /// Name of the sentence template with this id.
    pub fn sentence_template(&self, id: &str) -> Option<&SentenceTemplate> {
        match self.get(id).map(|p| &p.template) {
            Some(Template::Sentence(t)) => Some(t),
            _ => None,
        }
    }

    /// Copy keeping only patterns `keep` accepts.
    pub fn restrict(&self, mut keep: impl FnMut(&LinguisticPattern) -> bool) -> PatternSet {
        PatternSet {
            version: self.version.clone(),
            patterns: self.patterns.iter().filter(|p| keep(p)).cloned().collect(),
        }
    }

    /// SHA-256 over the canonical text form, hex encoded. Binds feature
    /// vectors and models to this exact set.
    pub fn layout_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

fn validate(p: &LinguisticPattern) -> Result<(), PatternSetError> {
    let invalid = |message: &str| PatternSetError::Invalid {
        id: p.id.clone(),
        message: message.to_string(),
    };
    let expected = Level::from_id(&p.id);
    if expected != Some(p.level) {
        return Err(invalid("id prefix does not match level"));
    }
    match &p.template {
        Template::Word(t) => {
            if t.term.is_empty() {
                return Err(invalid("empty term"));
            }
            if !t.category.is_keyword() {
                return Err(invalid("word patterns must be CBG or CME"));
            }
        }
        Template::Phrase(t) => {
            if !(2..=3).contains(&t.slots.len()) {
                return Err(invalid("phrase templates need two or three slots"));
            }
        }
        Template::Sentence(t) => {
            if t.required.is_empty() {
                return Err(invalid("sentence templates need at least one requirement"));
            }
            if t.name.trim().is_empty() {
                return Err(invalid("empty name"));
            }
        }
        Template::BugReport(t) => {
            if t.min_sentence_matches < 1 {
                return Err(invalid("min must be at least 1"));
            }
            if t.topics.is_empty() {
                return Err(invalid("no contributing topics"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_counts() {
        let set = PatternSet::default_set();
        assert_eq!(set.count(Level::Word), 23);
        assert_eq!(set.count(Level::Phrase), 12);
        assert_eq!(set.count(Level::Sentence), 17);
        assert_eq!(set.count(Level::BugReport), 6);
        assert_eq!(set.len(), 58);
        assert_eq!(set.ids()[..3], ["KW01", "KW02", "KW03"]);
        assert_eq!(set.ids()[23], "PH1");
        assert_eq!(set.ids()[34], "PH12");
        assert_eq!(set.ids()[57], "BR6");
    }

    #[test]
    fn every_structural_template_has_a_keyword_slot() {
        let set = PatternSet::default_set();
        for p in set.patterns() {
            let slots = match &p.template {
                Template::Phrase(t) => &t.slots,
                Template::Sentence(t) => &t.required,
                _ => continue,
            };
            assert!(slots.iter().any(|s| s.category.is_keyword()), "{}", p.id);
        }
    }

    #[test]
    fn every_keyword_entry_has_a_word_pattern() {
        let set = PatternSet::default_set();
        let lex = crate::lexicon::Lexicon::default_lexicon();
        let terms: BTreeSet<String> = set
            .level(Level::Word)
            .map(|p| match &p.template {
                Template::Word(t) => t.term.join(" "),
                _ => unreachable!(),
            })
            .collect();
        for abbr in [CategoryAbbr::CBG, CategoryAbbr::CME] {
            for e in &lex.category(abbr).entries {
                assert!(terms.contains(e), "{e}");
            }
        }
    }

    #[test]
    fn hash_changes_with_content() {
        let set = PatternSet::default_set();
        let smaller = set.restrict(|p| p.id != "SE17");
        assert_ne!(set.layout_hash(), smaller.layout_hash());
        assert_eq!(set.layout_hash(), PatternSet::default_set().layout_hash());
    }

    #[test]
    fn text_round_trip() {
        let set = PatternSet::default_set();
        assert_eq!(PatternSet::parse(&set.to_text()).unwrap(), set);
    }
}
