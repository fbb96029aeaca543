// SPDX-License-Identifier: Apache-2.0

//! Mining, fold assignment and lexicon lookup against brute-force
//! reference computations.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{fixtures, mini_corpus, mini_sentence_labels};
use lingpat::corpus::{stratified_kfold, Dataset, IssueReport, Label, Source};
use lingpat::lexicon::{CategoryAbbr, Lexicon};
use lingpat::patterns::{category_units, mine_phrase_candidates, Unit};
use lingpat::pipeline::Pipeline;
use lingpat::textproc::{Pos, ProcessedSentence};

type Key = Vec<(CategoryAbbr, Pos)>;

/// Some assignment of distinct units to the key's slots.
fn key_occurs(key: &Key, units: &[Unit]) -> bool {
    fn assign(key: &Key, at: usize, units: &[Unit], used: &mut Vec<bool>) -> bool {
        if at == key.len() {
            return true;
        }
        let (cat, pos) = key[at];
        for i in 0..units.len() {
            if !used[i] && units[i].pos == pos && units[i].categories.contains(&cat) {
                used[i] = true;
                if assign(key, at + 1, units, used) {
                    return true;
                }
                used[i] = false;
            }
        }
        false
    }
    assign(key, 0, units, &mut vec![false; units.len()])
}

/// Multisets of size `n` over `alphabet`, in sorted order.
fn multisets(alphabet: &[(CategoryAbbr, Pos)], n: usize) -> Vec<Key> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &a) in alphabet.iter().enumerate() {
        for mut rest in multisets(&alphabet[i..], n - 1) {
            rest.insert(0, a);
            out.push(rest);
        }
    }
    out
}

fn concurrency_sentences() -> (Vec<ProcessedSentence>, Lexicon) {
    let pipeline = Pipeline::default_pipeline();
    let dataset = mini_corpus();
    let sentences = pipeline.process(&dataset, 1);
    let wanted: BTreeSet<(String, usize)> = mini_sentence_labels()
        .into_iter()
        .filter(|l| l.is_concurrency_related)
        .map(|l| (l.report_id, l.sentence_index))
        .collect();
    let picked = sentences
        .into_iter()
        .flatten()
        .filter(|s| wanted.contains(&(s.report_id.clone(), s.index)))
        .collect();
    (picked, pipeline.lexicon().clone())
}

#[test]
fn mining_matches_key_first_enumeration() {
    let (sentences, lexicon) = concurrency_sentences();
    assert!(sentences.len() >= 20);
    let units: Vec<Vec<Unit>> = sentences.iter().map(|s| category_units(s, &lexicon)).collect();
    let alphabet: Vec<(CategoryAbbr, Pos)> = units
        .iter()
        .flatten()
        .flat_map(|u| u.categories.iter().map(move |&c| (c, u.pos)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    for n in [2, 3] {
        for min_support in [0.0, 0.05, 0.10, 0.25] {
            let mut expected: BTreeMap<Key, usize> = BTreeMap::new();
            for key in multisets(&alphabet, n) {
                if !key.iter().any(|(c, _)| matches!(c, CategoryAbbr::CBG | CategoryAbbr::CME)) {
                    continue;
                }
                let count = units.iter().filter(|u| key_occurs(&key, u)).count();
                if count > 0 && count as f64 / sentences.len() as f64 >= min_support {
                    expected.insert(key, count);
                }
            }
            let mined = mine_phrase_candidates(&sentences, &lexicon, n, min_support).unwrap();
            let got: BTreeMap<Key, usize> = mined.iter().map(|c| (c.slots.clone(), c.count)).collect();
            assert_eq!(got, expected, "n={n} min_support={min_support}");
            assert_eq!(got.len(), mined.len(), "no duplicate candidates");
        }
    }
}

fn labeled(n_pos: usize, n_neg: usize) -> Dataset {
    let report = |i: usize, positive: bool| IssueReport {
        id: format!("R{i:03}"),
        project: "p".into(),
        title: "t".into(),
        body: String::new(),
        label: if positive { Label::Concurrency } else { Label::NonConcurrency },
        source: Source::Synthetic,
        created_at: None,
    };
    Dataset::new((0..n_pos).map(|i| report(i, true)).chain((0..n_neg).map(|i| report(n_pos + i, false))).collect())
}

#[test]
fn stratified_folds_over_all_small_shapes() {
    for n_pos in 0..7 {
        for n_neg in 0..13 {
            let n = n_pos + n_neg;
            for k in 2..=n.min(6) {
                let dataset = labeled(n_pos, n_neg);
                let all: BTreeSet<String> = dataset.reports.iter().map(|r| r.id.clone()).collect();
                for seed in 0..3 {
                    let folds = stratified_kfold(&dataset, k, seed).unwrap();
                    assert_eq!(folds.len(), k);
                    let mut union = BTreeSet::new();
                    for f in &folds {
                        assert!(f.eval_ids.is_disjoint(&union), "overlap");
                        union.extend(f.eval_ids.iter().cloned());
                        let train: BTreeSet<String> = all.difference(&f.eval_ids).cloned().collect();
                        assert_eq!(f.train_ids, train);
                    }
                    assert_eq!(union, all);
                    let pos: Vec<usize> = folds
                        .iter()
                        .map(|f| f.eval_ids.iter().filter(|id| dataset.get(id).unwrap().label.is_positive()).count())
                        .collect();
                    let size: Vec<usize> = folds.iter().map(|f| f.eval_ids.len()).collect();
                    assert!(pos.iter().max().unwrap() - pos.iter().min().unwrap() <= 1, "{n_pos}/{n_neg} k={k}: {pos:?}");
                    assert!(size.iter().max().unwrap() - size.iter().min().unwrap() <= 1, "{n_pos}/{n_neg} k={k}: {size:?}");
                }
            }
            if n > 0 {
                assert!(stratified_kfold(&labeled(n_pos, n_neg), n + 1, 0).is_err());
            }
        }
    }
}

/// Every category whose entry list holds one of the lookup keys and whose
/// POS constraint admits `pos`, by scanning all entries.
fn scan_categories(lexicon: &Lexicon, lemma: &str, pos: Pos) -> BTreeSet<CategoryAbbr> {
    let keys: BTreeSet<String> = if pos == Pos::Api {
        let mut bases = vec![lemma.to_string()];
        if let Some(i) = lemma.rfind('.') {
            if i + 1 < lemma.len() {
                bases.push(lemma[i + 1..].to_string());
            }
        }
        bases
            .into_iter()
            .flat_map(|b| {
                let alt = match b.strip_suffix("()") {
                    Some(s) => s.to_string(),
                    None => format!("{b}()"),
                };
                [b, alt]
            })
            .collect()
    } else {
        [lemma.to_lowercase()].into()
    };
    CategoryAbbr::ALL
        .into_iter()
        .filter(|&abbr| {
            let c = lexicon.category(abbr);
            c.pos_constraint.contains(&pos) && c.entries.iter().any(|e| keys.contains(e))
        })
        .collect()
}

#[test]
fn unit_categories_equal_entry_scan() {
    let pipeline = Pipeline::default_pipeline();
    let lexicon = pipeline.lexicon();
    let mut checked = 0;
    for dataset in [fixtures(), mini_corpus()] {
        for s in pipeline.process(&dataset, 1).into_iter().flatten() {
            let units = category_units(&s, lexicon);
            let mut covered = vec![false; s.tokens.len()];
            for u in &units {
                let expected = if u.end - u.start == 1 {
                    let t = &s.tokens[u.start];
                    scan_categories(lexicon, &t.lemma, t.pos)
                } else {
                    let phrase = s.tokens[u.start..u.end].iter().map(|t| t.lemma.to_lowercase()).collect::<Vec<_>>().join(" ");
                    CategoryAbbr::ALL
                        .into_iter()
                        .filter(|&a| lexicon.category(a).entries.contains(&phrase) && lexicon.category(a).pos_constraint.contains(&u.pos))
                        .collect()
                };
                assert_eq!(u.categories, expected, "{:?} in {:?}", u.lemma, s.text);
                covered[u.start..u.end].iter_mut().for_each(|c| *c = true);
                checked += 1;
            }
            for (t, c) in s.tokens.iter().zip(&covered) {
                if !c && t.pos != Pos::Other {
                    assert!(scan_categories(lexicon, &t.lemma, t.pos).is_empty(), "{:?} in {:?} has categories but no unit", t.lemma, s.text);
                }
            }
        }
    }
    assert!(checked > 100);
}
