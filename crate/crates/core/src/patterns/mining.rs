// SPDX-License-Identifier: Apache-2.0

//! POS-typed category n-gram mining over concurrency-related sentences.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::matcher::{category_units, Unit};
use super::{PhraseTemplate, Slot};
use crate::lexicon::{CategoryAbbr, Lexicon};
use crate::textproc::{Pos, ProcessedSentence};

#[derive(Debug, Error, PartialEq)]
pub enum MiningError {
    #[error("corpus has no sentences")]
    EmptyCorpus,
    #[error("n must be 2 or 3, got {0}")]
    UnsupportedN(usize),
    #[error("min_support {0} outside [0, 1]")]
    InvalidSupport(f64),
}

/// A candidate phrase template: an unordered multiset of `(category, POS)`
/// slots, with at least one CBG or CME slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseCandidate {
    /// Sorted slot keys.
    pub slots: Vec<(CategoryAbbr, Pos)>,
    /// Sentences containing the combination.
    pub count: usize,
    /// `count` divided by the corpus sentence count.
    pub support: f64,
}

impl PhraseCandidate {
    pub fn to_template(&self, max_gap: usize) -> PhraseTemplate {
        PhraseTemplate {
            slots: self.slots.iter().map(|&(c, p)| Slot::new(c, p)).collect(),
            max_gap,
        }
    }

    pub fn label(&self) -> String {
        self.slots
            .iter()
            .map(|(c, p)| format!("{c}:{p}"))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Sorted slot keys of `n` distinct units co-occurring in the sentence.
pub(crate) fn sentence_keys(units: &[Unit], n: usize) -> BTreeSet<Vec<(CategoryAbbr, Pos)>> {
    let mut keys = BTreeSet::new();
    let mut pick = Vec::with_capacity(n);
    choose(units, n, 0, &mut pick, &mut keys);
    keys
}

fn choose<'a>(
    units: &'a [Unit],
    n: usize,
    from: usize,
    pick: &mut Vec<&'a Unit>,
    keys: &mut BTreeSet<Vec<(CategoryAbbr, Pos)>>,
) {
    if pick.len() == n {
        expand(pick, 0, &mut Vec::with_capacity(n), keys);
        return;
    }
    for i in from..units.len() {
        pick.push(&units[i]);
        choose(units, n, i + 1, pick, keys);
        pick.pop();
    }
}

fn expand(
    pick: &[&Unit],
    at: usize,
    acc: &mut Vec<(CategoryAbbr, Pos)>,
    keys: &mut BTreeSet<Vec<(CategoryAbbr, Pos)>>,
) {
    if at == pick.len() {
        if acc.iter().any(|(c, _)| c.is_keyword()) {
            let mut key = acc.clone();
            key.sort();
            keys.insert(key);
        }
        return;
    }
    for &c in &pick[at].categories {
        acc.push((c, pick[at].pos));
        expand(pick, at + 1, acc, keys);
        acc.pop();
    }
}

/// Rank `n`-slot category combinations by the share of sentences they occur
/// in, keeping those at or above `min_support`. Ties are broken by slot key.
pub fn mine_phrase_candidates(
    sentences: &[ProcessedSentence],
    lexicon: &Lexicon,
    n: usize,
    min_support: f64,
) -> Result<Vec<PhraseCandidate>, MiningError> {
    if !(2..=3).contains(&n) {
        return Err(MiningError::UnsupportedN(n));
    }
    if !(0.0..=1.0).contains(&min_support) {
        return Err(MiningError::InvalidSupport(min_support));
    }
    if sentences.is_empty() {
        return Err(MiningError::EmptyCorpus);
    }
    let mut counts: BTreeMap<Vec<(CategoryAbbr, Pos)>, usize> = BTreeMap::new();
    for s in sentences {
        let units = category_units(s, lexicon);
        for key in sentence_keys(&units, n) {
            *counts.entry(key).or_default() += 1;
        }
    }
    let total = sentences.len() as f64;
    let mut out: Vec<PhraseCandidate> = counts
        .into_iter()
        .map(|(slots, count)| PhraseCandidate {
            slots,
            count,
            support: count as f64 / total,
        })
        .filter(|c| c.support >= min_support)
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.slots.cmp(&b.slots)));
    Ok(out)
}
