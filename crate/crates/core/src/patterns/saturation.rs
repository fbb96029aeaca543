// SPDX-License-Identifier: Apache-2.0

//! Saturation analysis: grow the derivation corpus one unit at a time and
//! track how many lexicon entries and patterns are (re)discovered, and how
//! much of a held-out sentence set the discovered subset recalls.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::matcher::{category_units, Matcher, Unit};
use super::mining::mine_phrase_candidates;
use super::{Level, PatternSet, Template, Topic};
use crate::lexicon::{frequency_filter, identifier_variants, CategoryAbbr, Lexicon};
use crate::textproc::{Pos, ProcessedSentence};

#[derive(Debug, Error)]
pub enum SaturationError {
    #[error("no concurrency-related sentences: sentence labels are missing")]
    MissingSentenceLabels,
    #[error("held-out sentence set is empty")]
    EmptyHeldOut,
    #[error("report {0} has no project tag")]
    MissingProject(String),
    #[error("{0} sentences cannot be split into ten subsets")]
    TooFewSentences(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaturationUnit {
    /// Ten seeded, near-equal random subsets.
    SubsetTenths,
    /// One project per iteration, largest first.
    ByProject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationConfig {
    pub unit: SaturationUnit,
    pub seed: u64,
    /// Minimum sentence share for a CBG/CME entry or word pattern.
    pub keyword_threshold: f64,
    /// Minimum sentence share for entries of the other categories.
    pub entry_threshold: f64,
    /// Minimum support for mined phrase candidates.
    pub phrase_min_support: f64,
}

impl std::str::FromStr for SaturationUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "tenths" | "subset-tenths" | "subsets" => Ok(SaturationUnit::SubsetTenths),
            "project" | "by-project" | "projects" => Ok(SaturationUnit::ByProject),
            other => Err(format!("unknown saturation unit {other:?}")),
        }
    }
}

impl Default for SaturationConfig {
    fn default() -> Self {
        SaturationConfig {
            unit: SaturationUnit::SubsetTenths,
            seed: 0,
            keyword_threshold: 0.05,
            entry_threshold: 0.0,
            phrase_min_support: 0.10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationPoint {
    pub iteration: usize,
    /// Unit added in this iteration (project name, or subset number).
    pub unit_label: String,
    pub sentences_seen: usize,
    pub entries_by_category: BTreeMap<CategoryAbbr, usize>,
    pub total_entries: usize,
    pub new_entries: usize,
    pub patterns_by_level: BTreeMap<Level, usize>,
    pub total_patterns: usize,
    pub new_patterns: usize,
    /// Held-out sentence recall per level with the discovered subset.
    pub recall: BTreeMap<Level, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationCurve {
    pub points: Vec<SaturationPoint>,
    /// Held-out recall with the complete lexicon and pattern set.
    pub full_recall: BTreeMap<Level, f64>,
}

/// Held-out sentence recall per level: the share of sentences that produce
/// at least one hit at that level when matched on their own.
pub fn heldout_recall(matcher: &Matcher, heldout: &[ProcessedSentence]) -> BTreeMap<Level, f64> {
    let mut hits: BTreeMap<Level, usize> = Level::ALL.iter().map(|l| (*l, 0)).collect();
    for s in heldout {
        let report = matcher.match_report(&s.report_id, std::slice::from_ref(s));
        for level in &report.matched_levels {
            *hits.get_mut(level).expect("all levels present") += 1;
        }
    }
    let n = heldout.len().max(1) as f64;
    hits.into_iter().map(|(l, c)| (l, c as f64 / n)).collect()
}

fn partition(
    derivation: &[ProcessedSentence],
    projects: &HashMap<String, String>,
    config: &SaturationConfig,
) -> Result<Vec<(String, Vec<usize>)>, SaturationError> {
    match config.unit {
        SaturationUnit::SubsetTenths => {
            if derivation.len() < 10 {
                return Err(SaturationError::TooFewSentences(derivation.len()));
            }
            let mut order: Vec<usize> = (0..derivation.len()).collect();
            order.sort_by(|&a, &b| {
                (&derivation[a].report_id, derivation[a].index).cmp(&(&derivation[b].report_id, derivation[b].index))
            });
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
            let n = order.len();
            Ok((0..10)
                .map(|i| {
                    let (lo, hi) = (i * n / 10, (i + 1) * n / 10);
                    (format!("subset {}", i + 1), order[lo..hi].to_vec())
                })
                .collect())
        }
        SaturationUnit::ByProject => {
            let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (i, s) in derivation.iter().enumerate() {
                let p = projects
                    .get(&s.report_id)
                    .ok_or_else(|| SaturationError::MissingProject(s.report_id.clone()))?;
                groups.entry(p.as_str()).or_default().push(i);
            }
            let mut groups: Vec<(String, Vec<usize>)> =
                groups.into_iter().map(|(p, v)| (p.to_string(), v)).collect();
            groups.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));
            Ok(groups)
        }
    }
}

/// The lexicon entry a unit stands for in category `abbr`.
fn entry_for(lexicon: &Lexicon, abbr: CategoryAbbr, unit: &Unit) -> Option<String> {
    if abbr.is_identifier() {
        identifier_variants(&unit.lemma)
            .into_iter()
            .find(|v| lexicon.contains(abbr, v))
    } else {
        lexicon.contains(abbr, &unit.lemma).then(|| unit.lemma.clone())
    }
}

fn term_present(s: &ProcessedSentence, term: &[String]) -> bool {
    let lemmas: Vec<String> = s.tokens.iter().map(|t| t.lemma.to_lowercase()).collect();
    term.len() <= lemmas.len() && lemmas.windows(term.len()).any(|w| w == term)
}

pub fn saturation_curve(
    derivation: &[ProcessedSentence],
    heldout: &[ProcessedSentence],
    projects: &HashMap<String, String>,
    lexicon: &Lexicon,
    patterns: &PatternSet,
    config: &SaturationConfig,
) -> Result<SaturationCurve, SaturationError> {
    if derivation.is_empty() {
        return Err(SaturationError::MissingSentenceLabels);
    }
    if heldout.is_empty() {
        return Err(SaturationError::EmptyHeldOut);
    }
    let groups = partition(derivation, projects, config)?;
    let full = Matcher::new(lexicon.clone(), patterns.clone());
    let units: Vec<Vec<Unit>> = derivation.iter().map(|s| category_units(s, lexicon)).collect();

    let mut seen: Vec<usize> = Vec::new();
    let mut entries: BTreeSet<(CategoryAbbr, String)> = BTreeSet::new();
    let mut found: BTreeSet<String> = BTreeSet::new();
    let mut points = Vec::new();

    for (iteration, (label, members)) in groups.into_iter().enumerate() {
        seen.extend(members);
        let total = seen.len();

        // entries: sentence counts per (category, entry), then frequency filter
        let mut counts: BTreeMap<(CategoryAbbr, String), usize> = BTreeMap::new();
        for &i in &seen {
            let mut in_sentence = BTreeSet::new();
            for u in &units[i] {
                for &abbr in &u.categories {
                    if let Some(e) = entry_for(lexicon, abbr, u) {
                        in_sentence.insert((abbr, e));
                    }
                }
            }
            for key in in_sentence {
                *counts.entry(key).or_default() += 1;
            }
        }
        let before_entries = entries.len();
        for abbr in CategoryAbbr::ALL {
            let candidates: Vec<(String, usize)> = counts
                .iter()
                .filter(|((a, _), _)| *a == abbr)
                .map(|((_, e), c)| (e.clone(), *c))
                .collect();
            let threshold = if abbr.is_keyword() { config.keyword_threshold } else { config.entry_threshold };
            for (e, _) in frequency_filter(&candidates, total, threshold).expect("total > 0") {
                entries.insert((abbr, e));
            }
        }

        // patterns
        let before_patterns = found.len();
        let subset: Vec<ProcessedSentence> = seen.iter().map(|&i| derivation[i].clone()).collect();
        let mut mined: BTreeSet<Vec<(CategoryAbbr, Pos)>> = BTreeSet::new();
        for n in [2, 3] {
            for c in mine_phrase_candidates(&subset, lexicon, n, config.phrase_min_support).expect("non-empty") {
                mined.insert(c.slots);
            }
        }
        let sentence_hits = full.match_sentence_level(&subset);
        let hit_ids: BTreeSet<&str> = sentence_hits.iter().map(|h| h.pattern_id.as_str()).collect();
        for p in patterns.patterns() {
            let discovered = match &p.template {
                Template::Word(t) => {
                    let c = subset.iter().filter(|s| term_present(s, &t.term)).count();
                    c > 0 && c as f64 / total as f64 >= config.keyword_threshold
                }
                Template::Phrase(t) => {
                    let mut key: Vec<(CategoryAbbr, Pos)> = t.slots.iter().map(|s| (s.category, s.pos)).collect();
                    key.sort();
                    mined.contains(&key)
                }
                Template::Sentence(_) => hit_ids.contains(p.id.as_str()),
                Template::BugReport(_) => false,
            };
            if discovered {
                found.insert(p.id.clone());
            }
        }
        for p in patterns.level(Level::BugReport) {
            let Template::BugReport(t) = &p.template else { continue };
            let fed = found.iter().any(|id| {
                patterns
                    .sentence_template(id)
                    .is_some_and(|st| st.topic != Topic::Other && t.topics.contains(&st.topic))
            });
            if fed {
                found.insert(p.id.clone());
            }
        }

        let restricted_lex = lexicon.restrict(|abbr, e| entries.contains(&(abbr, e.to_string())));
        let restricted_set = patterns.restrict(|p| found.contains(&p.id));
        let matcher = Matcher::with_guard(restricted_lex, lexicon.clone(), restricted_set.clone());

        let mut entries_by_category: BTreeMap<CategoryAbbr, usize> = CategoryAbbr::ALL.iter().map(|a| (*a, 0)).collect();
        for (abbr, _) in &entries {
            *entries_by_category.get_mut(abbr).expect("all categories") += 1;
        }
        points.push(SaturationPoint {
            iteration: iteration + 1,
            unit_label: label,
            sentences_seen: total,
            entries_by_category,
            total_entries: entries.len(),
            new_entries: entries.len() - before_entries,
            patterns_by_level: Level::ALL.iter().map(|l| (*l, restricted_set.count(*l))).collect(),
            total_patterns: found.len(),
            new_patterns: found.len() - before_patterns,
            recall: heldout_recall(&matcher, heldout),
        });
    }

    Ok(SaturationCurve {
        points,
        full_recall: heldout_recall(&full, heldout),
    })
}
