// SPDX-License-Identifier: Apache-2.0

//! Lexicon-first POS tagger.

use std::collections::BTreeSet;

use super::entities::EntityRecognizer;
use super::lemma::Lemmatizer;
use super::tokenize::{tokenize, RawToken};
use super::{Pos, Token};
use crate::lexicon::Lexicon;

const ARTICLES: &[&str] = &[
    "a", "an", "the", "my", "your", "his", "her", "its", "our", "their", "this", "these", "those",
    "each", "every", "some", "any", "another", "whose", "no",
];

const AUXILIARIES: &[&str] = &[
    "be", "am", "is", "are", "was", "were", "been", "being", "has", "have", "had", "do", "does",
    "did", "will", "would", "shall", "should", "can", "could", "may", "might", "must", "to",
    "don't", "doesn't", "didn't", "won't", "can't", "cannot", "isn't", "wasn't", "not", "never",
];

const SUBJECT_PRONOUNS: &[&str] = &["i", "you", "he", "she", "it", "we", "they", "who", "which", "that"];

const PREPOSITIONS: &[&str] = &[
    "of", "in", "on", "at", "for", "from", "by", "with", "about", "into", "onto", "over",
    "under", "between", "through", "during", "before", "after", "within", "without", "via",
    "per", "upon", "against", "across", "behind", "inside", "outside",
];

const CLOSED_CLASS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "my", "your", "his", "her", "its", "our",
    "their", "i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them", "what",
    "which", "who", "whom", "whose", "where", "when", "why", "how", "and", "or", "but", "if",
    "then", "else", "so", "because", "while", "although", "though", "as", "than", "to", "up",
    "down", "out", "off", "there", "here", "some", "any", "all", "each", "every", "both", "such",
    "also", "just", "only", "very", "too", "more", "most", "much", "many", "few", "other",
    "another", "like", "once", "until", "unless", "whether", "yes", "be", "am", "is", "are",
    "was", "were", "been", "being", "has", "have", "had", "having", "do", "does", "did", "done",
    "doing", "will", "would", "shall", "should", "can", "could", "may", "might", "must", "it's",
    "that's", "there's", "i'm", "i've", "we're", "they're", "you're", "let's", "what's", "still",
    "even", "since", "either", "itself", "themselves", "anything", "something", "everything",
    "someone", "anyone", "everyone", "now", "ok", "okay", "please", "thanks", "hi", "hello",
];

const ADJ_HINTS: &[&str] = &[
    "parallel", "volatile", "async", "incorrect", "wrong", "broken", "invalid", "threadsafe",
    "corrupt", "duplicate", "fair", "stale", "safe", "intermittent", "no",
];

const ADV_HINTS: &[&str] = &[
    "again", "forever", "already", "later", "meanwhile", "always", "often", "not", "never",
    "don't", "doesn't", "didn't", "isn't", "wasn't", "can't", "won't", "cannot", "nor", "neither",
    "nothing", "none", "nobody", "unable",
];

fn looks_adjective(lemma: &str) -> bool {
    ADJ_HINTS.contains(&lemma)
        || ["ous", "ic", "ive", "ble", "ent", "ant", "ful", "less", "ky", "ed", "id"]
            .iter()
            .any(|s| lemma.ends_with(s))
}

fn looks_adverb(lemma: &str) -> bool {
    ADV_HINTS.contains(&lemma) || lemma.ends_with("ly")
}

fn is_numeric(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_digit())
}

/// Tagging context for the token before the current one.
#[derive(Clone, Copy)]
struct Prev<'a> {
    lower: &'a str,
    pos: Pos,
    possessive: bool,
    plural: bool,
}

pub(crate) struct Tagger<'a> {
    pub lexicon: &'a Lexicon,
    pub lemmatizer: &'a Lemmatizer,
    pub recognizer: &'a dyn EntityRecognizer,
}

impl Tagger<'_> {
    pub fn tag(&self, sentence: &str) -> Vec<Token> {
        let raw = tokenize(sentence);
        let n = raw.len();
        let lowers: Vec<String> = raw.iter().map(|t| t.surface.to_lowercase().replace('’', "'")).collect();
        let is_api: Vec<bool> = raw.iter().map(|t| self.recognizer.is_entity(&t.surface)).collect();
        let bases: Vec<Option<String>> = raw
            .iter()
            .zip(&is_api)
            .map(|(t, &api)| {
                if api || is_numeric(&t.surface) {
                    None
                } else {
                    self.lemmatizer.known_base(&t.surface)
                }
            })
            .collect();

        let mut tags: Vec<Option<(String, Pos)>> = vec![None; n];
        self.tag_phrases(&raw, &lowers, &is_api, &bases, &mut tags);

        for i in 0..n {
            if tags[i].is_some() {
                continue;
            }
            let prev = (i > 0).then(|| {
                let (_, pos) = tags[i - 1].as_ref().expect("tagged left to right");
                // single capital letters mid-sentence are labels, as in "thread A"
                let label = i > 1 && raw[i - 1].surface.len() == 1 && raw[i - 1].surface.chars().all(|c| c.is_ascii_uppercase());
                Prev {
                    lower: if label { "" } else { lowers[i - 1].as_str() },
                    pos: *pos,
                    possessive: lowers[i - 1].ends_with("'s") && !CLOSED_CLASS.contains(&lowers[i - 1].as_str()),
                    plural: lowers[i - 1].ends_with('s')
                        && !lowers[i - 1].ends_with("ss")
                        && tags[i - 1].as_ref().is_some_and(|(l, _)| *l != lowers[i - 1]),
                }
            });
            let next = lowers.get(i + 1).map(String::as_str);
            tags[i] = Some(self.tag_word(&raw[i], &lowers[i], is_api[i], bases[i].as_deref(), prev, next, i == 0));
        }

        raw.into_iter()
            .zip(tags)
            .map(|(t, tag)| {
                let (lemma, pos) = tag.expect("every token tagged");
                Token {
                    surface: t.surface,
                    lemma,
                    pos,
                    span: (t.start, t.end),
                }
            })
            .collect()
    }

    /// Tag consecutive tokens forming a multi-word lexicon entry, longest first.
    fn tag_phrases(
        &self,
        raw: &[RawToken],
        lowers: &[String],
        is_api: &[bool],
        bases: &[Option<String>],
        tags: &mut [Option<(String, Pos)>],
    ) {
        let max = self.lexicon.max_phrase_len();
        if max < 2 {
            return;
        }
        let keys: Vec<String> = bases
            .iter()
            .zip(lowers)
            .map(|(b, l)| b.clone().unwrap_or_else(|| l.clone()))
            .collect();
        let mut i = 0;
        while i < raw.len() {
            let mut matched = 0;
            for len in (2..=max.min(raw.len() - i)).rev() {
                if is_api[i..i + len].iter().any(|&a| a) {
                    continue;
                }
                let cats = self.lexicon.phrase_categories(&keys[i..i + len]);
                if let Some(first) = cats.first() {
                    let pos = if cats.iter().any(|c| self.lexicon.category(*c).admits(Pos::Noun)) {
                        Pos::Noun
                    } else {
                        *self
                            .lexicon
                            .category(*first)
                            .pos_constraint
                            .iter()
                            .next()
                            .expect("non-empty constraint")
                    };
                    for j in i..i + len {
                        tags[j] = Some((keys[j].clone(), pos));
                    }
                    matched = len;
                    break;
                }
            }
            i += matched.max(1);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn tag_word(
        &self,
        raw: &RawToken,
        lower: &str,
        is_api: bool,
        base: Option<&str>,
        prev: Option<Prev<'_>>,
        next: Option<&str>,
        first: bool,
    ) -> (String, Pos) {
        if is_api {
            return (raw.surface.clone(), Pos::Api);
        }
        if is_numeric(lower) {
            return (lower.to_string(), Pos::Other);
        }
        if let Some(base) = base {
            let mut options = self.lexicon.pos_options(base);
            if !options.is_empty() {
                options.extend(self.lemmatizer.base_pos(base));
                let pos = resolve(&options, base, lower, prev, next);
                return (base.to_string(), pos);
            }
        }
        if CLOSED_CLASS.contains(&lower) {
            let lemma = self.lemmatizer.irregular(lower).unwrap_or(lower).to_string();
            return (lemma, Pos::Other);
        }
        if let Some(base) = base {
            let options = self.lemmatizer.base_pos(base);
            if !options.is_empty() {
                let pos = resolve(&options, base, lower, prev, next);
                return (base.to_string(), pos);
            }
            if self.lemmatizer.irregular(lower).is_some() {
                return (base.to_string(), Pos::Verb);
            }
        }
        let pos = guess_unknown(raw, lower, prev, first);
        (self.lemmatizer.lemma(lower, pos), pos)
    }
}

fn after_article(prev: Option<Prev<'_>>) -> bool {
    prev.is_some_and(|p| ARTICLES.contains(&p.lower) || p.possessive || p.pos == Pos::Adj)
}

fn after_verb_trigger(prev: Option<Prev<'_>>) -> bool {
    prev.is_some_and(|p| AUXILIARIES.contains(&p.lower) || SUBJECT_PRONOUNS.contains(&p.lower))
}

fn resolve(options: &BTreeSet<Pos>, lemma: &str, lower: &str, prev: Option<Prev<'_>>, next: Option<&str>) -> Pos {
    let has = |p: Pos| options.contains(&p);
    if options.len() == 1 {
        let only = *options.iter().next().expect("len 1");
        if only == Pos::Verb && prev.is_some_and(|p| ARTICLES.contains(&p.lower) || p.possessive) {
            return Pos::Noun;
        }
        return only;
    }
    if has(Pos::Noun) && has(Pos::Verb) {
        let pos = noun_or_verb(lemma, lower, prev, next);
        if pos == Pos::Noun && has(Pos::Adj) && looks_adjective(lemma) {
            return Pos::Adj;
        }
        return pos;
    }
    if has(Pos::Verb) && has(Pos::Adj) {
        return if after_article(prev) { Pos::Adj } else { Pos::Verb };
    }
    if has(Pos::Adv) && has(Pos::Adj) {
        return if looks_adverb(lemma) { Pos::Adv } else { Pos::Adj };
    }
    if has(Pos::Noun) && has(Pos::Adj) {
        return if looks_adjective(lemma) { Pos::Adj } else { Pos::Noun };
    }
    *options.iter().next().expect("non-empty")
}

fn noun_or_verb(lemma: &str, lower: &str, prev: Option<Prev<'_>>, next: Option<&str>) -> Pos {
    if after_article(prev) {
        return Pos::Noun;
    }
    if after_verb_trigger(prev) {
        return Pos::Verb;
    }
    let inflected = lower != lemma;
    if lower.ends_with("ed") || lower.ends_with("ing") {
        return if inflected { Pos::Verb } else { Pos::Noun };
    }
    if let Some(p) = prev {
        if p.pos == Pos::Noun && inflected && lower.ends_with('s') {
            return Pos::Verb;
        }
        if p.pos == Pos::Noun && p.plural && !inflected {
            return Pos::Verb;
        }
    }
    if next.is_some_and(|n| ARTICLES.contains(&n) && n != "no") {
        return Pos::Verb;
    }
    Pos::Noun
}

fn guess_unknown(raw: &RawToken, lower: &str, prev: Option<Prev<'_>>, first: bool) -> Pos {
    if lower.ends_with("ly") && lower.len() > 4 {
        return Pos::Adv;
    }
    let suffix = |list: &[&str]| list.iter().any(|s| lower.ends_with(s) && lower.len() > s.len() + 2);
    if suffix(&["tion", "sion", "ment", "ness", "ity", "ance", "ence", "ism", "ship", "ure"]) {
        return Pos::Noun;
    }
    if suffix(&["ous", "ive", "ful", "less", "able", "ible", "ical"]) {
        return Pos::Adj;
    }
    if suffix(&["ize", "ise", "ify"]) {
        return Pos::Verb;
    }
    if (lower.ends_with("ed") || lower.ends_with("ing")) && after_verb_trigger(prev) {
        return Pos::Verb;
    }
    if after_article(prev) || prev.is_some_and(|p| PREPOSITIONS.contains(&p.lower)) {
        return Pos::Noun;
    }
    if !first && raw.surface.chars().next().is_some_and(char::is_uppercase) {
        return Pos::Noun;
    }
    Pos::Other
}
