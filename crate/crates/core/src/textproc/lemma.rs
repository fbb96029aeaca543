// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeSet, HashMap, HashSet};

use super::Pos;
use crate::lexicon::Lexicon;

const IRREGULARS: &str = include_str!("../../data/irregulars.txt");
const BASE_WORDS: &str = include_str!("../../data/base_words.txt");

/// Rule-plus-exception-table lemmatizer.
///
/// Lookup order: irregular table, then the word itself if it is a known base
/// form, then suffix-stripping candidates that land on a known base form.
/// Unknown words fall back to POS-directed suffix stripping.
#[derive(Debug, Clone)]
pub struct Lemmatizer {
    irregulars: HashMap<String, String>,
    base_pos: HashMap<String, BTreeSet<Pos>>,
    vocab: HashSet<String>,
}

impl Lemmatizer {
    pub fn new(lexicon: &Lexicon) -> Lemmatizer {
        let mut irregulars = HashMap::new();
        for line in data_lines(IRREGULARS) {
            let mut parts = line.split_whitespace();
            if let (Some(surface), Some(base)) = (parts.next(), parts.next()) {
                irregulars.insert(surface.to_string(), base.to_string());
            }
        }
        let mut base_pos: HashMap<String, BTreeSet<Pos>> = HashMap::new();
        for line in data_lines(BASE_WORDS) {
            let mut parts = line.split_whitespace();
            if let (Some(word), Some(tags)) = (parts.next(), parts.next()) {
                let set = base_pos.entry(word.to_string()).or_default();
                set.extend(tags.split('|').filter_map(|t| t.parse::<Pos>().ok()));
            }
        }
        let mut vocab = lexicon.vocabulary();
        vocab.extend(base_pos.keys().cloned());
        vocab.extend(irregulars.values().cloned());
        Lemmatizer {
            irregulars,
            base_pos,
            vocab,
        }
    }

    /// Base form if the word is an irregular, a known base form, or a
    /// regular inflection of one.
    pub fn known_base(&self, word: &str) -> Option<String> {
        let w = normalize(word);
        if let Some(base) = self.irregulars.get(&w) {
            return Some(base.clone());
        }
        if self.vocab.contains(&w) {
            return Some(w);
        }
        suffix_candidates(&w)
            .into_iter()
            .find(|c| self.vocab.contains(c))
    }

    pub fn irregular(&self, word: &str) -> Option<&str> {
        self.irregulars.get(&normalize(word)).map(String::as_str)
    }

    /// Lemma of `word` given its POS.
    pub fn lemma(&self, word: &str, pos: Pos) -> String {
        if pos == Pos::Api {
            return word.to_string();
        }
        if let Some(base) = self.known_base(word) {
            return base;
        }
        let w = normalize(word);
        match pos {
            Pos::Noun => strip_noun(&w),
            Pos::Verb => strip_verb(&w),
            _ => w,
        }
    }

    /// POS values listed for a base form in the built-in vocabulary.
    pub fn base_pos(&self, lemma: &str) -> BTreeSet<Pos> {
        self.base_pos.get(lemma).cloned().unwrap_or_default()
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn normalize(word: &str) -> String {
    let w = word.to_lowercase().replace('’', "'");
    match w.strip_suffix("'s") {
        Some(stem) if !stem.is_empty() => stem.to_string(),
        _ => w,
    }
}

fn undouble(stem: &str) -> Option<String> {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 3 && b[n - 1] == b[n - 2] && !b"aeioulsfz".contains(&b[n - 1]) {
        Some(stem[..n - 1].to_string())
    } else {
        None
    }
}

fn suffix_candidates(w: &str) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(s) = w.strip_suffix("ies").filter(|s| s.len() >= 2) {
        out.push(format!("{s}y"));
    }
    if let Some(s) = w.strip_suffix("ied").filter(|s| s.len() >= 2) {
        out.push(format!("{s}y"));
    }
    if w.ends_with('s') && !w.ends_with("ss") && w.len() > 2 {
        out.push(w[..w.len() - 1].to_string());
    }
    if let Some(s) = w
        .strip_suffix("es")
        .filter(|s| s.len() >= 2 && ["s", "x", "z", "ch", "sh", "o"].iter().any(|e| s.ends_with(e)))
    {
        out.push(s.to_string());
    }
    for suffix in ["ed", "ing"] {
        if let Some(s) = w.strip_suffix(suffix).filter(|s| s.len() >= 2) {
            out.push(s.to_string());
            out.push(format!("{s}e"));
            if let Some(u) = undouble(s) {
                out.push(u);
            }
        }
    }
    out
}

fn strip_noun(w: &str) -> String {
    if let Some(s) = w.strip_suffix("ies").filter(|s| s.len() >= 2) {
        return format!("{s}y");
    }
    for suffix in ["sses", "ches", "shes", "xes", "zzes"] {
        if w.ends_with(suffix) {
            return w[..w.len() - 2].to_string();
        }
    }
    if w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") && w.len() > 3 {
        return w[..w.len() - 1].to_string();
    }
    w.to_string()
}

fn restore_e(stem: &str) -> String {
    if let Some(u) = undouble(stem) {
        return u;
    }
    if ["at", "iz", "us", "uc", "v", "dg", "ac"].iter().any(|e| stem.ends_with(e)) {
        return format!("{stem}e");
    }
    stem.to_string()
}

fn strip_verb(w: &str) -> String {
    if let Some(s) = w.strip_suffix("ied").filter(|s| s.len() >= 2) {
        return format!("{s}y");
    }
    if let Some(s) = w.strip_suffix("ed").filter(|s| s.len() >= 3) {
        return restore_e(s);
    }
    if let Some(s) = w.strip_suffix("ing").filter(|s| s.len() >= 3) {
        return restore_e(s);
    }
    strip_noun(w)
}
