// SPDX-License-Identifier: Apache-2.0

//! Sentence segmentation, tokenization, lemmatization, POS tagging and
//! software entity recognition.

mod entities;
mod lemma;
mod segment;
mod tagger;
mod tokenize;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use entities::{recognize_software_entities, EntityRecognizer, HeuristicRecognizer};
pub use lemma::Lemmatizer;
pub use segment::{prose_paragraphs, segment_sentences};
pub use tokenize::{tokenize, RawToken};

use crate::corpus::IssueReport;
use crate::lexicon::Lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Api,
    Other,
}

impl Pos {
    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Verb => "VERB",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Api => "API",
            Pos::Other => "OTHER",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NOUN" => Ok(Pos::Noun),
            "VERB" => Ok(Pos::Verb),
            "ADJ" => Ok(Pos::Adj),
            "ADV" => Ok(Pos::Adv),
            "API" => Ok(Pos::Api),
            "OTHER" => Ok(Pos::Other),
            other => Err(format!("unknown POS {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    /// Character offsets `[start, end)` into the sentence text.
    pub span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessedSentence {
    pub report_id: String,
    pub index: usize,
    pub text: String,
    pub tokens: Vec<Token>,
    pub verb_set: BTreeSet<String>,
    pub noun_set: BTreeSet<String>,
    pub adv_adj_set: BTreeSet<String>,
    pub api_set: BTreeSet<String>,
}

impl ProcessedSentence {
    /// Build a sentence and derive its lemma sets from `tokens`.
    pub fn new(report_id: impl Into<String>, index: usize, text: impl Into<String>, tokens: Vec<Token>) -> Self {
        let mut s = ProcessedSentence {
            report_id: report_id.into(),
            index,
            text: text.into(),
            tokens,
            verb_set: BTreeSet::new(),
            noun_set: BTreeSet::new(),
            adv_adj_set: BTreeSet::new(),
            api_set: BTreeSet::new(),
        };
        for t in &s.tokens {
            let set = match t.pos {
                Pos::Verb => &mut s.verb_set,
                Pos::Noun => &mut s.noun_set,
                Pos::Adj | Pos::Adv => &mut s.adv_adj_set,
                Pos::Api => &mut s.api_set,
                Pos::Other => continue,
            };
            set.insert(t.lemma.clone());
        }
        s
    }

    pub fn is_question(&self) -> bool {
        self.text.trim_end().ends_with('?')
    }

    /// Substring of the sentence text covering a character span.
    pub fn slice(&self, span: (usize, usize)) -> String {
        self.text.chars().skip(span.0).take(span.1.saturating_sub(span.0)).collect()
    }
}

/// Reusable preprocessing pipeline bound to one lexicon.
pub struct TextProcessor {
    lexicon: Lexicon,
    lemmatizer: Lemmatizer,
    recognizer: Box<dyn EntityRecognizer>,
}

impl TextProcessor {
    pub fn new(lexicon: Lexicon) -> TextProcessor {
        TextProcessor::with_recognizer(lexicon, Box::new(HeuristicRecognizer))
    }

    pub fn with_recognizer(lexicon: Lexicon, recognizer: Box<dyn EntityRecognizer>) -> TextProcessor {
        let lemmatizer = Lemmatizer::new(&lexicon);
        TextProcessor {
            lexicon,
            lemmatizer,
            recognizer,
        }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn lemmatizer(&self) -> &Lemmatizer {
        &self.lemmatizer
    }

    pub fn tag_tokens(&self, sentence: &str) -> Vec<Token> {
        tagger::Tagger {
            lexicon: &self.lexicon,
            lemmatizer: &self.lemmatizer,
            recognizer: self.recognizer.as_ref(),
        }
        .tag(sentence)
    }

    pub fn process_text(&self, report_id: &str, title: &str, body: &str) -> Vec<ProcessedSentence> {
        segment_sentences(title, body)
            .into_iter()
            .enumerate()
            .map(|(i, text)| {
                let tokens = self.tag_tokens(&text);
                ProcessedSentence::new(report_id, i, text, tokens)
            })
            .collect()
    }

    pub fn process_report(&self, report: &IssueReport) -> Vec<ProcessedSentence> {
        self.process_text(&report.id, &report.title, &report.body)
    }
}

/// One-shot tagging with a fresh pipeline.
pub fn tag_tokens(sentence: &str, lexicon: &Lexicon) -> Vec<Token> {
    TextProcessor::new(lexicon.clone()).tag_tokens(sentence)
}

/// One-shot report processing with a fresh pipeline.
pub fn process_report(report: &IssueReport, lexicon: &Lexicon) -> Vec<ProcessedSentence> {
    TextProcessor::new(lexicon.clone()).process_report(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn processor() -> TextProcessor {
        TextProcessor::new(Lexicon::default_lexicon())
    }

    fn tagged(s: &str) -> Vec<(String, Pos)> {
        processor()
            .tag_tokens(s)
            .into_iter()
            .map(|t| (t.lemma, t.pos))
            .collect()
    }

    fn lp(l: &str, p: Pos) -> (String, Pos) {
        (l.to_string(), p)
    }

    #[test]
    fn thread_is_hung() {
        assert_eq!(
            tagged("thread is hung"),
            vec![lp("thread", Pos::Noun), lp("be", Pos::Other), lp("hang", Pos::Verb)]
        );
    }

    #[test]
    fn plural_stripping() {
        assert_eq!(tagged("locks")[0].0, "lock");
    }

    #[test]
    fn lock_noun_versus_verb() {
        assert_eq!(
            tagged("I am trying to acquire a fair lock."),
            vec![
                lp("i", Pos::Other),
                lp("be", Pos::Other),
                lp("try", Pos::Verb),
                lp("to", Pos::Other),
                lp("acquire", Pos::Verb),
                lp("a", Pos::Other),
                lp("fair", Pos::Adj),
                lp("lock", Pos::Noun),
            ]
        );
        let t = tagged("The thread locked the mutex.");
        assert_eq!(t[2], lp("lock", Pos::Verb));
        let t = tagged("The lock hangs forever");
        assert_eq!(
            t[1..],
            [lp("lock", Pos::Noun), lp("hang", Pos::Verb), lp("forever", Pos::Adv)]
        );
    }

    #[test]
    fn multiword_entry_tagged_as_unit() {
        let t = tagged("A race condition occurs");
        assert_eq!(t[1], lp("race", Pos::Noun));
        assert_eq!(t[2], lp("condition", Pos::Noun));
        assert_eq!(t[3], lp("occur", Pos::Verb));
    }

    #[test]
    fn api_tokens_keep_case() {
        let t = processor().tag_tokens("tryLock() throws Exception!");
        assert_eq!(t[0].pos, Pos::Api);
        assert_eq!(t[0].lemma, "tryLock()");
        assert_eq!(t[1].lemma, "throw");
        assert_eq!(t[1].pos, Pos::Verb);
    }

    #[test]
    fn lock_screen_report() {
        let p = processor();
        let sents = p.process_text(
            "r",
            "App crashes when screen is locked",
            "When the screen of the phone is locked, the app crashes.",
        );
        let s = &sents[1];
        assert!(s.noun_set.contains("screen"));
        assert!(s.noun_set.contains("phone"));
        assert!(s.verb_set.contains("lock"));
        assert!(!s.noun_set.contains("lock"));
    }

    #[test]
    fn sets_follow_tokens() {
        let p = processor();
        for s in p.process_text("r", "Deadlock in ReentrantLock", "Two threads wait forever. It is not fixed.") {
            let rebuilt = ProcessedSentence::new(&s.report_id, s.index, &s.text, s.tokens.clone());
            assert_eq!(rebuilt, s);
            for t in &s.tokens {
                let chars: Vec<char> = s.text.chars().collect();
                assert!(t.span.1 <= chars.len());
                assert_eq!(chars[t.span.0..t.span.1].iter().collect::<String>(), t.surface);
                if t.pos != Pos::Api {
                    assert_eq!(t.lemma, t.lemma.to_lowercase());
                }
            }
        }
    }

    #[test]
    fn title_only_report() {
        assert_eq!(processor().process_text("r", "Thread deadlock in stress test!", "").len(), 1);
    }
}
