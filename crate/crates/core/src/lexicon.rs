// SPDX-License-Identifier: Apache-2.0

//! Word-category lexicon.
//!
//! Ten named categories (concurrency bug nouns, mechanism nouns, terminology,
//! operation and symptom verbs, time adverbs, bug synonyms, APIs, exceptions
//! and negations), each with a POS constraint. The on-disk format is
//! line-oriented:
//!
//! ```text
//! version = 1.0.0
//! [CBG] pos=NOUN expected=10
//! deadlock
//! race condition
//! ```
//!
//! Multi-word entries are stored as space-joined lemma sequences and looked
//! up through [`Lexicon::categorize_phrase`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textproc::Pos;

const DEFAULT_LEXICON: &str = include_str!("../data/lexicon.txt");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("lexicon is missing category {0}")]
    MissingCategory(CategoryAbbr),
    #[error("entry {entry:?} conflicts: listed in {first} and {second} with overlapping POS")]
    DuplicateEntryConflict {
        entry: String,
        first: CategoryAbbr,
        second: CategoryAbbr,
    },
    #[error("category {0} has no entries")]
    EmptyCategory(CategoryAbbr),
    #[error("corpus sentence count is zero")]
    ZeroCorpus,
    #[error("threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
}

/// Abbreviation naming one of the ten word categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CategoryAbbr {
    /// Concurrency bug nouns.
    CBG,
    /// Concurrency mechanism nouns.
    CME,
    /// Concurrency terminology.
    CTR,
    /// Programming operation verbs.
    POP,
    /// Programming symptom verbs.
    PSY,
    /// Adverbs of time.
    AOT,
    /// Synonyms for bug.
    SYB,
    /// Concurrency APIs.
    API,
    /// Exceptions.
    EXC,
    /// Negative words.
    NEG,
}

impl CategoryAbbr {
    pub const ALL: [CategoryAbbr; 10] = [
        CategoryAbbr::CBG,
        CategoryAbbr::CME,
        CategoryAbbr::CTR,
        CategoryAbbr::POP,
        CategoryAbbr::PSY,
        CategoryAbbr::AOT,
        CategoryAbbr::SYB,
        CategoryAbbr::API,
        CategoryAbbr::EXC,
        CategoryAbbr::NEG,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CategoryAbbr::CBG => "CBG",
            CategoryAbbr::CME => "CME",
            CategoryAbbr::CTR => "CTR",
            CategoryAbbr::POP => "POP",
            CategoryAbbr::PSY => "PSY",
            CategoryAbbr::AOT => "AOT",
            CategoryAbbr::SYB => "SYB",
            CategoryAbbr::API => "API",
            CategoryAbbr::EXC => "EXC",
            CategoryAbbr::NEG => "NEG",
        }
    }

    /// Default POS constraint for the category.
    pub fn default_pos(self) -> &'static [Pos] {
        match self {
            CategoryAbbr::CBG | CategoryAbbr::CME => &[Pos::Noun],
            CategoryAbbr::CTR | CategoryAbbr::SYB => &[Pos::Noun, Pos::Adj],
            CategoryAbbr::POP | CategoryAbbr::PSY => &[Pos::Verb],
            CategoryAbbr::AOT | CategoryAbbr::NEG => &[Pos::Adv, Pos::Adj],
            CategoryAbbr::API | CategoryAbbr::EXC => &[Pos::Api],
        }
    }

    /// API and EXC hold code identifiers, which are case-sensitive.
    pub fn is_identifier(self) -> bool {
        matches!(self, CategoryAbbr::API | CategoryAbbr::EXC)
    }

    /// The two categories the keyword level is built from.
    pub fn is_keyword(self) -> bool {
        matches!(self, CategoryAbbr::CBG | CategoryAbbr::CME)
    }
}

impl fmt::Display for CategoryAbbr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CategoryAbbr {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CategoryAbbr::ALL
            .iter()
            .copied()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordCategory {
    pub abbr: CategoryAbbr,
    pub pos_constraint: BTreeSet<Pos>,
    pub entries: BTreeSet<String>,
    /// Documented size of the category; advisory only.
    pub expected_count: Option<usize>,
}

impl WordCategory {
    pub fn admits(&self, pos: Pos) -> bool {
        self.pos_constraint.contains(&pos)
    }
}

/// Non-fatal findings from [`Lexicon::parse`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexiconWarning {
    CountMismatch {
        abbr: CategoryAbbr,
        expected: usize,
        actual: usize,
    },
    PosMismatch {
        abbr: CategoryAbbr,
        declared: Vec<Pos>,
    },
}

impl fmt::Display for LexiconWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LexiconWarning::CountMismatch {
                abbr,
                expected,
                actual,
            } => write!(f, "{abbr}: {actual} entries, expected {expected}"),
            LexiconWarning::PosMismatch { abbr, declared } => {
                let declared: Vec<_> = declared.iter().map(|p| p.as_str()).collect();
                write!(
                    f,
                    "{abbr}: declared pos {} differs from the default constraint",
                    declared.join("|")
                )
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    pub version: String,
    categories: BTreeMap<CategoryAbbr, WordCategory>,
    /// single-word entry -> categories (identifier entries keyed verbatim)
    words: HashMap<String, Vec<CategoryAbbr>>,
    /// multi-word entry (as lemma list) -> categories
    phrases: HashMap<Vec<String>, Vec<CategoryAbbr>>,
    max_phrase_len: usize,
}

impl Lexicon {
    /// The lexicon shipped with the crate.
    pub fn default_lexicon() -> Lexicon {
        Lexicon::parse(DEFAULT_LEXICON)
            .map(|(lex, _)| lex)
            .expect("bundled lexicon is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Lexicon, Vec<LexiconWarning>), LexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let (lexicon, warnings) = Lexicon::parse(&text)?;
        for w in &warnings {
            log::warn!("{}: {w}", path.display());
        }
        Ok((lexicon, warnings))
    }

    pub fn parse(text: &str) -> Result<(Lexicon, Vec<LexiconWarning>), LexiconError> {
        let mut version = String::from("unversioned");
        let mut categories: BTreeMap<CategoryAbbr, WordCategory> = BTreeMap::new();
        let mut current: Option<CategoryAbbr> = None;

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let (abbr, attrs) = rest.split_once(']').ok_or_else(|| LexiconError::Syntax {
                    line: line_no,
                    message: "unterminated section header".into(),
                })?;
                let abbr: CategoryAbbr = abbr.parse().map_err(|message| LexiconError::Syntax {
                    line: line_no,
                    message,
                })?;
                if categories.contains_key(&abbr) {
                    return Err(LexiconError::Syntax {
                        line: line_no,
                        message: format!("category {abbr} declared twice"),
                    });
                }
                let mut pos_constraint: BTreeSet<Pos> = abbr.default_pos().iter().copied().collect();
                let mut expected_count = None;
                for attr in attrs.split_whitespace() {
                    let (key, value) = attr.split_once('=').ok_or_else(|| LexiconError::Syntax {
                        line: line_no,
                        message: format!("malformed attribute {attr:?}"),
                    })?;
                    match key {
                        "pos" => {
                            pos_constraint = value
                                .split(['|', ','])
                                .map(|p| p.parse::<Pos>())
                                .collect::<Result<_, _>>()
                                .map_err(|message| LexiconError::Syntax {
                                    line: line_no,
                                    message,
                                })?;
                        }
                        "expected" => {
                            expected_count =
                                Some(value.parse().map_err(|_| LexiconError::Syntax {
                                    line: line_no,
                                    message: format!("bad expected count {value:?}"),
                                })?);
                        }
                        other => {
                            return Err(LexiconError::Syntax {
                                line: line_no,
                                message: format!("unknown attribute {other:?}"),
                            })
                        }
                    }
                }
                categories.insert(
                    abbr,
                    WordCategory {
                        abbr,
                        pos_constraint,
                        entries: BTreeSet::new(),
                        expected_count,
                    },
                );
                current = Some(abbr);
                continue;
            }
            if current.is_none() {
                if let Some((key, value)) = line.split_once('=') {
                    if key.trim() == "version" {
                        version = value.trim().trim_matches('"').to_string();
                        continue;
                    }
                }
                return Err(LexiconError::Syntax {
                    line: line_no,
                    message: "entry outside of a category section".into(),
                });
            }
            let abbr = current.expect("checked above");
            let entry = normalize_entry(abbr, line);
            let cat = categories.get_mut(&abbr).expect("section registered");
            if !cat.entries.insert(entry.clone()) {
                return Err(LexiconError::DuplicateEntryConflict {
                    entry,
                    first: abbr,
                    second: abbr,
                });
            }
        }

        for abbr in CategoryAbbr::ALL {
            match categories.get(&abbr) {
                None => return Err(LexiconError::MissingCategory(abbr)),
                Some(c) if c.entries.is_empty() => return Err(LexiconError::EmptyCategory(abbr)),
                Some(_) => {}
            }
        }

        Lexicon::from_categories(version, categories)
    }

    fn from_categories(
        version: String,
        categories: BTreeMap<CategoryAbbr, WordCategory>,
    ) -> Result<(Lexicon, Vec<LexiconWarning>), LexiconError> {
        // A lemma may live in several categories only if their POS sets are disjoint.
        let mut owners: HashMap<&str, Vec<CategoryAbbr>> = HashMap::new();
        for cat in categories.values() {
            for entry in &cat.entries {
                let key = entry.as_str();
                if let Some(prev) = owners.get(key) {
                    for &other in prev {
                        let other_pos = &categories[&other].pos_constraint;
                        if !other_pos.is_disjoint(&cat.pos_constraint) {
                            return Err(LexiconError::DuplicateEntryConflict {
                                entry: entry.clone(),
                                first: other,
                                second: cat.abbr,
                            });
                        }
                    }
                }
                owners.entry(key).or_default().push(cat.abbr);
            }
        }

        let mut warnings = Vec::new();
        for cat in categories.values() {
            if let Some(expected) = cat.expected_count {
                if expected != cat.entries.len() {
                    warnings.push(LexiconWarning::CountMismatch {
                        abbr: cat.abbr,
                        expected,
                        actual: cat.entries.len(),
                    });
                }
            }
            let published: BTreeSet<Pos> = cat.abbr.default_pos().iter().copied().collect();
            if published != cat.pos_constraint {
                warnings.push(LexiconWarning::PosMismatch {
                    abbr: cat.abbr,
                    declared: cat.pos_constraint.iter().copied().collect(),
                });
            }
        }

        let mut words: HashMap<String, Vec<CategoryAbbr>> = HashMap::new();
        let mut phrases: HashMap<Vec<String>, Vec<CategoryAbbr>> = HashMap::new();
        let mut max_phrase_len = 1;
        for cat in categories.values() {
            for entry in &cat.entries {
                let parts: Vec<String> = entry.split_whitespace().map(str::to_string).collect();
                if parts.len() > 1 {
                    max_phrase_len = max_phrase_len.max(parts.len());
                    phrases.entry(parts).or_default().push(cat.abbr);
                } else {
                    words.entry(entry.clone()).or_default().push(cat.abbr);
                }
            }
        }

        Ok((
            Lexicon {
                version,
                categories,
                words,
                phrases,
                max_phrase_len,
            },
            warnings,
        ))
    }

    pub fn category(&self, abbr: CategoryAbbr) -> &WordCategory {
        &self.categories[&abbr]
    }

    pub fn categories(&self) -> impl Iterator<Item = &WordCategory> {
        self.categories.values()
    }

    /// Every category whose entries contain `lemma` and whose POS constraint
    /// admits `pos`. Identifier categories are matched verbatim, falling back
    /// to the last segment of a dotted path and to `()`-suffix variants.
    pub fn categorize(&self, lemma: &str, pos: Pos) -> BTreeSet<CategoryAbbr> {
        let mut out = BTreeSet::new();
        if pos == Pos::Api {
            for key in identifier_variants(lemma) {
                self.collect(&key, pos, &mut out);
            }
        } else {
            self.collect(&lemma.to_lowercase(), pos, &mut out);
        }
        out
    }

    fn collect(&self, key: &str, pos: Pos, out: &mut BTreeSet<CategoryAbbr>) {
        if let Some(cats) = self.words.get(key) {
            for &abbr in cats {
                if self.categories[&abbr].admits(pos) {
                    out.insert(abbr);
                }
            }
        }
    }

    /// Categories of a multi-word entry, keyed by its lemma sequence. `pos`
    /// is the POS of the phrase head (its last token).
    pub fn categorize_phrase(&self, lemmas: &[&str], pos: Pos) -> BTreeSet<CategoryAbbr> {
        let key: Vec<String> = lemmas.iter().map(|l| l.to_lowercase()).collect();
        self.phrases
            .get(&key)
            .map(|cats| {
                cats.iter()
                    .copied()
                    .filter(|abbr| self.categories[abbr].admits(pos))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Categories listing this multi-word entry, regardless of POS.
    pub fn phrase_categories(&self, lemmas: &[String]) -> &[CategoryAbbr] {
        self.phrases.get(lemmas).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Longest multi-word entry, in lemmas.
    pub fn max_phrase_len(&self) -> usize {
        self.max_phrase_len
    }

    /// POS values any category admits for this (single-word) lemma.
    pub fn pos_options(&self, lemma: &str) -> BTreeSet<Pos> {
        self.words
            .get(&lemma.to_lowercase())
            .map(|cats| {
                cats.iter()
                    .filter(|abbr| !abbr.is_identifier())
                    .flat_map(|abbr| self.categories[abbr].pos_constraint.iter().copied())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Lowercase words occurring anywhere in a non-identifier entry.
    pub fn vocabulary(&self) -> HashSet<String> {
        self.categories
            .values()
            .filter(|c| !c.abbr.is_identifier())
            .flat_map(|c| c.entries.iter())
            .flat_map(|e| e.split_whitespace().map(str::to_string))
            .collect()
    }

    pub fn contains(&self, abbr: CategoryAbbr, entry: &str) -> bool {
        self.categories[&abbr].entries.contains(entry)
    }

    /// Copy of this lexicon keeping only the entries `keep` accepts. Every
    /// category stays present, possibly empty.
    pub fn restrict(&self, mut keep: impl FnMut(CategoryAbbr, &str) -> bool) -> Lexicon {
        let categories = self
            .categories
            .iter()
            .map(|(&abbr, cat)| {
                let entries = cat.entries.iter().filter(|e| keep(abbr, e)).cloned().collect();
                (
                    abbr,
                    WordCategory {
                        entries,
                        ..cat.clone()
                    },
                )
            })
            .collect();
        Lexicon::from_categories(self.version.clone(), categories)
            .map(|(lex, _)| lex)
            .expect("a subset of a valid lexicon is valid")
    }

    pub fn total_entries(&self) -> usize {
        self.categories.values().map(|c| c.entries.len()).sum()
    }

    /// Render back to the line-oriented file format.
    pub fn to_text(&self) -> String {
        let mut out = format!("version = {}\n", self.version);
        for cat in self.categories.values() {
            let pos: Vec<_> = cat.pos_constraint.iter().map(|p| p.as_str()).collect();
            out.push_str(&format!("\n[{}] pos={}", cat.abbr, pos.join("|")));
            if let Some(n) = cat.expected_count {
                out.push_str(&format!(" expected={n}"));
            }
            out.push('\n');
            for entry in &cat.entries {
                out.push_str(entry);
                out.push('\n');
            }
        }
        out
    }
}

fn normalize_entry(abbr: CategoryAbbr, line: &str) -> String {
    let joined = line.split_whitespace().collect::<Vec<_>>().join(" ");
    if abbr.is_identifier() {
        joined
    } else {
        joined.to_lowercase()
    }
}

/// Lookup keys for a code identifier, most specific first.
pub(crate) fn identifier_variants(ident: &str) -> Vec<String> {
    let mut bases = vec![ident.to_string()];
    if let Some((_, last)) = ident.rsplit_once('.') {
        if !last.is_empty() {
            bases.push(last.to_string());
        }
    }
    let mut out = Vec::new();
    for base in bases {
        out.push(base.clone());
        match base.strip_suffix("()") {
            Some(stripped) => out.push(stripped.to_string()),
            None => out.push(format!("{base}()")),
        }
    }
    out.dedup();
    out
}

/// Keep `(entry, count)` pairs whose relative frequency over the corpus is at
/// least `threshold`.
pub fn frequency_filter(
    candidates: &[(String, usize)],
    corpus_sentence_count: usize,
    threshold: f64,
) -> Result<Vec<(String, usize)>, LexiconError> {
    if corpus_sentence_count == 0 {
        return Err(LexiconError::ZeroCorpus);
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(LexiconError::InvalidThreshold(threshold));
    }
    let total = corpus_sentence_count as f64;
    Ok(candidates
        .iter()
        .filter(|(_, count)| *count as f64 / total >= threshold)
        .cloned()
        .collect())
}
