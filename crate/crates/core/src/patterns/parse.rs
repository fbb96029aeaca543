// SPDX-License-Identifier: Apache-2.0

//! Line-oriented pattern-set file format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use super::{
    BugReportTemplate, Level, LinguisticPattern, PatternSet, PatternSetError, PhraseTemplate, SentenceKind,
    SentenceTemplate, Slot, Template, Topic, WordTemplate,
};
use crate::lexicon::CategoryAbbr;

pub const DEFAULT_MAX_GAP: usize = 4;

#[derive(Debug, Error)]
#[error("pattern file line {line}: {message}")]
pub struct PatternParseError {
    pub line: usize,
    pub message: String,
}

/// Split on whitespace outside quotes and braces.
fn lex(s: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_quote = false;
    let mut depth = 0usize;
    for c in s.chars() {
        match c {
            '"' if depth == 0 => {
                in_quote = !in_quote;
                cur.push(c);
            }
            '{' if !in_quote => {
                depth += 1;
                cur.push(c);
            }
            '}' if !in_quote => {
                depth = depth.checked_sub(1).ok_or("unbalanced '}'")?;
                cur.push(c);
            }
            c if c.is_whitespace() && !in_quote && depth == 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if in_quote {
        return Err("unterminated quote".into());
    }
    if depth != 0 {
        return Err("unterminated '{'".into());
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

fn unquote(s: &str) -> String {
    s.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(s)
        .to_string()
}

pub(crate) fn parse_slot(s: &str) -> Result<Slot, String> {
    let (head, filter) = match s.split_once('{') {
        Some((head, rest)) => {
            let inner = rest.strip_suffix('}').ok_or_else(|| format!("bad slot filter in {s:?}"))?;
            let items: BTreeSet<String> = inner
                .split('|')
                .map(|i| i.split_whitespace().collect::<Vec<_>>().join(" "))
                .filter(|i| !i.is_empty())
                .collect();
            if items.is_empty() {
                return Err(format!("empty filter in {s:?}"));
            }
            (head, Some(items))
        }
        None => (s, None),
    };
    let (cat, pos) = head.split_once(':').ok_or_else(|| format!("slot {s:?} is not CAT:POS"))?;
    let category: CategoryAbbr = cat.parse()?;
    let pos = pos.parse()?;
    Ok(Slot { category, pos, filter })
}

fn split_filter_aware(s: &str) -> Vec<String> {
    // commas inside {...} belong to the filter
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    for c in s.chars() {
        match c {
            '{' => {
                depth += 1;
                cur.push(c)
            }
            '}' => {
                depth = depth.saturating_sub(1);
                cur.push(c)
            }
            ',' if depth == 0 => out.push(std::mem::take(&mut cur)),
            c => cur.push(c),
        }
    }
    out.push(cur);
    out
}

fn parse_slot_list(s: &str) -> Result<Vec<Slot>, String> {
    split_filter_aware(s)
        .iter().filter(|p| !p.trim().is_empty()).map(|p| parse_slot(p.trim())).collect()
}

impl PatternSet {
    pub fn parse(text: &str) -> Result<PatternSet, PatternSetError> {
        let mut version = String::from("unversioned");
        let mut patterns = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| PatternParseError { line: line_no, message };
            if let Some(rest) = line.strip_prefix('[') {
                let (id, body) = rest.split_once(']').ok_or_else(|| err("unterminated id".into()))?;
                let pattern = parse_pattern(id.trim(), body).map_err(err)?;
                patterns.push(pattern);
            } else if let Some((key, value)) = line.split_once('=') {
                if key.trim() == "version" {
                    version = unquote(value.trim());
                } else {
                    return Err(err(format!("unknown setting {:?}", key.trim())).into());
                }
            } else {
                return Err(err(format!("unrecognized line {line:?}")).into());
            }
        }
        PatternSet::new(version, patterns)
    }

    /// Canonical text form; parsing it yields an equal set.
    pub fn to_text(&self) -> String {
        let mut out = format!("version = {}\n", self.version);
        let mut last = None;
        for p in self.patterns() {
            if last != Some(p.level) {
                out.push('\n');
                last = Some(p.level);
            }
            let _ = write!(out, "[{}] ", p.id);
            match &p.template {
                Template::Word(t) => {
                    let _ = write!(out, "term=\"{}\" category={}", t.term.join(" "), t.category);
                }
                Template::Phrase(t) => {
                    let slots: Vec<String> = t.slots.iter().map(|s| s.to_string()).collect();
                    let _ = write!(out, "{} gap={}", slots.join(" + "), t.max_gap);
                }
                Template::Sentence(t) => {
                    let req: Vec<String> = t.required.iter().map(|s| s.to_string()).collect();
                    let _ = write!(out, "name=\"{}\" require={}", t.name, req.join(","));
                    if !t.forbidden.is_empty() {
                        let f: Vec<String> = t.forbidden.iter().map(|s| s.to_string()).collect();
                        let _ = write!(out, " forbid={}", f.join(","));
                    }
                    let _ = write!(out, " topic={} kind={}", t.topic, t.kind);
                }
                Template::BugReport(t) => {
                    let topics: Vec<String> = t.topics.iter().map(|t| t.to_string()).collect();
                    let _ = write!(
                        out,
                        "name=\"{}\" topics={} min={}",
                        t.name,
                        topics.join(","),
                        t.min_sentence_matches
                    );
                }
            }
            if !p.example.is_empty() {
                let _ = write!(out, " example=\"{}\"", p.example);
            }
            if !p.description.is_empty() {
                let _ = write!(out, " desc=\"{}\"", p.description);
            }
            out.push('\n');
        }
        out
    }
}

fn parse_pattern(id: &str, body: &str) -> Result<LinguisticPattern, String> {
    let level = Level::from_id(id).ok_or_else(|| format!("id {id:?} has no level prefix (KW, PH, SE, BR)"))?;
    let tokens = lex(body)?;
    let mut attrs: BTreeMap<String, String> = BTreeMap::new();
    let mut bare = Vec::new();
    for t in tokens {
        match t.split_once('=') {
            Some((k, v)) if !k.contains(['{', ':']) => {
                if attrs.insert(k.to_string(), unquote(v)).is_some() {
                    return Err(format!("attribute {k:?} repeated"));
                }
            }
            _ => bare.push(t),
        }
    }
    let mut take = |key: &str| attrs.remove(key);
    let example = take("example").unwrap_or_default();
    let description = take("desc").unwrap_or_default();
    let template = match level {
        Level::Word => {
            let term = take("term").ok_or("word pattern needs term=")?;
            let category = take("category").ok_or("word pattern needs category=")?.parse()?;
            Template::Word(WordTemplate {
                term: term.split_whitespace().map(|w| w.to_lowercase()).collect(),
                category,
            })
        }
        Level::Phrase => {
            let slots = bare
                .iter()
                .filter(|t| t.as_str() != "+")
                .map(|t| parse_slot(t))
                .collect::<Result<Vec<_>, _>>()?;
            let max_gap = match take("gap") {
                Some(g) => g.parse().map_err(|_| format!("bad gap {g:?}"))?,
                None => DEFAULT_MAX_GAP,
            };
            bare.clear();
            Template::Phrase(PhraseTemplate { slots, max_gap })
        }
        Level::Sentence => Template::Sentence(SentenceTemplate {
            name: take("name").ok_or("sentence pattern needs name=")?,
            required: parse_slot_list(&take("require").ok_or("sentence pattern needs require=")?)?,
            forbidden: match take("forbid") {
                Some(f) => parse_slot_list(&f)?,
                None => Vec::new(),
            },
            topic: take("topic").ok_or("sentence pattern needs topic=")?.parse::<Topic>()?,
            kind: match take("kind") {
                Some(k) => k.parse()?,
                None => SentenceKind::Symptom,
            },
        }),
        Level::BugReport => Template::BugReport(BugReportTemplate {
            name: take("name").ok_or("bug report pattern needs name=")?,
            topics: take("topics")
                .ok_or("bug report pattern needs topics=")?
                .split(',')
                .map(str::parse)
                .collect::<Result<_, _>>()?,
            min_sentence_matches: match take("min") {
                Some(m) => m.parse().map_err(|_| format!("bad min {m:?}"))?,
                None => 1,
            },
        }),
    };
    if !bare.is_empty() {
        return Err(format!("unexpected tokens {bare:?}"));
    }
    if let Some(k) = attrs.keys().next() {
        return Err(format!("unknown attribute {k:?}"));
    }
    Ok(LinguisticPattern {
        id: id.to_string(),
        level,
        template,
        description,
        example,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::Pos;

    #[test]
    fn slot_with_multiword_filter() {
        let s = parse_slot("CBG:NOUN{race|race condition}").unwrap();
        assert_eq!(s.category, CategoryAbbr::CBG);
        assert_eq!(s.pos, Pos::Noun);
        assert!(s.filter.unwrap().contains("race condition"));
    }

    #[test]
    fn sentence_line() {
        let set = PatternSet::parse(
            "[SE2] name=\"Lock Symptom\" require=CME:NOUN{lock|mutex},PSY:VERB forbid=NEG:ADV topic=Lock kind=symptom",
        )
        .unwrap();
        let t = set.sentence_template("SE2").unwrap();
        assert_eq!(t.required.len(), 2);
        assert_eq!(t.forbidden.len(), 1);
        assert_eq!(t.topic, Topic::Lock);
    }

    #[test]
    fn phrase_default_gap() {
        let set = PatternSet::parse("[PH1] CBG:NOUN + CME:NOUN").unwrap();
        match &set.patterns()[0].template {
            Template::Phrase(t) => assert_eq!(t.max_gap, DEFAULT_MAX_GAP),
            _ => unreachable!(),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = PatternSet::parse("version = 1\n\n[PH1] CBG:NOUN + XYZ:NOUN").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(PatternSet::parse("[XX1] term=\"a\"").is_err());
        assert!(matches!(
            PatternSet::parse("[KW1] term=\"a\" category=CBG\n[KW1] term=\"b\" category=CBG"),
            Err(PatternSetError::DuplicateId(_))
        ));
        assert!(PatternSet::parse("[BR1] name=\"x\" topics=Lock min=0").is_err());
        assert!(PatternSet::parse("[SE1] name=\"x\" require= topic=Lock").is_err());
    }
}
