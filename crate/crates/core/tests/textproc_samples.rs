// SPDX-License-Identifier: Apache-2.0

//! Tagger and entity recognizer measured against the hand-labeled samples
//! in `data/`.

use std::collections::HashSet;

use lingpat::lexicon::{CategoryAbbr, Lexicon};
use lingpat::textproc::{recognize_software_entities, Pos, TextProcessor};

const POS_SAMPLE: &str = include_str!("../data/pos_sample.txt");
const ENTITY_SAMPLE: &str = include_str!("../data/entity_sample.txt");

fn lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Sentence text plus `(word, tag)` annotations in order.
fn parse_pos_line(line: &str) -> (String, Vec<(String, Pos)>) {
    let mut words = Vec::new();
    let mut gold = Vec::new();
    for chunk in line.split_whitespace() {
        let body = chunk.trim_end_matches(['.', ',', ';', ':', '!', '?']);
        let tail = &chunk[body.len()..];
        match body.rsplit_once('/') {
            Some((word, tag)) if tag.parse::<Pos>().is_ok() && !word.is_empty() => {
                gold.push((word.to_string(), tag.parse().unwrap()));
                words.push(format!("{word}{tail}"));
            }
            _ => words.push(chunk.to_string()),
        }
    }
    (words.join(" "), gold)
}

fn identifiers(lex: &Lexicon) -> HashSet<String> {
    [CategoryAbbr::API, CategoryAbbr::EXC]
        .into_iter()
        .flat_map(|a| lex.category(a).entries.iter().cloned())
        .collect()
}

#[test]
fn pos_agreement_on_lexicon_words() {
    let lex = Lexicon::default_lexicon();
    let vocab = lex.vocabulary();
    let ids = identifiers(&lex);
    let processor = TextProcessor::new(lex.clone());
    let (mut total, mut agree, mut sentences) = (0usize, 0usize, 0usize);
    let mut disagreements = Vec::new();
    let mut unannotated = Vec::new();
    for line in lines(POS_SAMPLE) {
        sentences += 1;
        let (text, gold) = parse_pos_line(line);
        let tokens = processor.tag_tokens(&text);
        let mut annotated = vec![false; tokens.len()];
        let mut cursor = 0;
        for (word, tag) in &gold {
            let at = tokens[cursor..]
                .iter()
                .position(|t| t.surface == *word)
                .map(|i| i + cursor)
                .unwrap_or_else(|| panic!("annotation {word:?} does not align with a token in {text:?}"));
            annotated[at] = true;
            cursor = at + 1;
            total += 1;
            if tokens[at].pos == *tag {
                agree += 1;
            } else {
                disagreements.push(format!("{word}: gold {tag}, tagged {} in {text:?}", tokens[at].pos));
            }
        }
        for (t, done) in tokens.iter().zip(&annotated) {
            let covered = vocab.contains(&t.lemma.to_lowercase())
                || vocab.contains(&t.surface.to_lowercase())
                || ids.contains(&t.surface);
            if covered && !done {
                unannotated.push(format!("{:?} in {text:?}", t.surface));
            }
        }
    }
    assert!(unannotated.is_empty(), "lexicon words without annotation:\n{}", unannotated.join("\n"));
    let rate = agree as f64 / total as f64;
    println!("POS agreement {agree}/{total} = {rate:.3} over {sentences} sentences");
    for d in &disagreements {
        println!("  {d}");
    }
    assert!(sentences >= 200);
    assert!(rate >= 0.90, "agreement {rate:.3} below 0.90");
}

#[test]
fn entity_precision() {
    let (mut flagged, mut correct, mut gold_total) = (0usize, 0usize, 0usize);
    let mut false_positives = Vec::new();
    for line in lines(ENTITY_SAMPLE) {
        let mut gold = Vec::new();
        let mut rest = line;
        while let Some(start) = rest.find("{{") {
            let end = rest[start..].find("}}").expect("balanced markers") + start;
            gold.push(rest[start + 2..end].to_string());
            rest = &rest[end + 2..];
        }
        gold_total += gold.len();
        let text = line.replace("{{", "").replace("}}", "");
        for t in recognize_software_entities(&text) {
            flagged += 1;
            if let Some(i) = gold.iter().position(|g| *g == t.surface) {
                gold.remove(i);
                correct += 1;
            } else {
                false_positives.push(t.surface);
            }
        }
    }
    let precision = correct as f64 / flagged as f64;
    let recall = correct as f64 / gold_total as f64;
    println!("entity precision {correct}/{flagged} = {precision:.3}, recall {recall:.3}; false positives {false_positives:?}");
    assert!(precision >= 0.90, "precision {precision:.3} below 0.90");
}
