// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use proptest::prelude::*;

use lingpat::classify::{classify_by_levels, rebalance, train, Hyperparameters, ModelKind, Rebalance, TrainedModel, TrainingSet};
use lingpat::corpus::{downsample_to_prevalence, Dataset};
use lingpat::eval::{f_measure, score, ConfusionCounts};
use lingpat::lexicon::Lexicon;
use lingpat::llmbridge::{parse_verdict, Verdict};
use lingpat::patterns::Level;
use lingpat::pipeline::Pipeline;
use lingpat::synth::{generate, SynthConfig};
use lingpat::textproc::{segment_sentences, tokenize, TextProcessor};

fn word() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z]{1,8}",
        "[A-Z][a-z]{1,6}[A-Z][a-z]{1,6}",
        "[a-z]{2,6}\\.[a-z]{2,6}\\(\\)",
        "[0-9]{1,3}",
        Just("don't".to_string()),
        Just("lock".to_string()),
        Just("deadlock".to_string()),
        Just("threads".to_string()),
    ]
}

fn sentence() -> impl Strategy<Value = String> {
    (prop::collection::vec((word(), prop_oneof![Just(" "), Just(", "), Just(" ("), Just(") ")]), 1..14), prop_oneof![Just("."), Just("?"), Just("")])
        .prop_map(|(parts, end)| {
            let mut s: String = parts.iter().map(|(w, sep)| format!("{w}{sep}")).collect();
            s = s.trim_end().trim_end_matches([',', '(']).to_string();
            s.push_str(end);
            s
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn token_spans_slice_back_to_surfaces(s in sentence()) {
        let processor = TextProcessor::new(Lexicon::default_lexicon());
        let chars: Vec<char> = s.chars().collect();
        let tokens = processor.tag_tokens(&s);
        prop_assert_eq!(tokens.len(), tokenize(&s).len());
        let mut last_end = 0;
        for t in &tokens {
            prop_assert!(t.span.0 >= last_end && t.span.0 < t.span.1 && t.span.1 <= chars.len());
            let slice: String = chars[t.span.0..t.span.1].iter().collect();
            prop_assert_eq!(&slice, &t.surface);
            prop_assert!(!t.lemma.is_empty());
            last_end = t.span.1;
        }
    }

    #[test]
    fn whitespace_words_yield_one_token_each(words in prop::collection::vec("[a-zA-Z]{1,10}", 1..20)) {
        let s = words.join(" ");
        let surfaces: Vec<String> = tokenize(&s).into_iter().map(|t| t.surface).collect();
        prop_assert_eq!(surfaces, words);
    }

    #[test]
    fn title_is_first_sentence(title in "[A-Z][a-z]{2,10}( [a-z]{2,8}){0,5}", body in prop::collection::vec(sentence(), 0..4)) {
        let body = body.join(" ");
        let segments = segment_sentences(&title, &body);
        prop_assert_eq!(segments.first().map(|s| s.trim()), Some(title.trim()));
    }

    #[test]
    fn f_measure_lies_between_precision_and_recall(p in 0.0f64..=1.0, r in 0.0f64..=1.0) {
        let f = f_measure(p, r);
        prop_assert!((f - f_measure(r, p)).abs() < 1e-15);
        if p == 0.0 || r == 0.0 {
            prop_assert_eq!(f, 0.0);
        } else {
            prop_assert!(f >= p.min(r) - 1e-12 && f <= p.max(r) + 1e-12);
        }
    }

    #[test]
    fn confusion_counts_partition_the_ids(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..60)) {
        let predicted: BTreeMap<String, bool> = pairs.iter().enumerate().map(|(i, (p, _))| (format!("r{i}"), *p)).collect();
        let gold: BTreeMap<String, bool> = pairs.iter().enumerate().map(|(i, (_, g))| (format!("r{i}"), *g)).collect();
        let c = score(&predicted, &gold).unwrap();
        prop_assert_eq!(c.total(), pairs.len());
        prop_assert_eq!(c.tp + c.fn_, pairs.iter().filter(|(_, g)| *g).count());
        let m = c.metrics();
        for v in [m.precision, m.recall, m.f_measure] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        let mut halves = ConfusionCounts::default();
        for (p, g) in &pairs {
            halves.record(*p, *g);
        }
        prop_assert_eq!(halves, c);
    }

    #[test]
    fn leading_yes_or_no_decides(prefix in "[ \\*\\.\"]{0,3}", word in "[yY][eE][sS]|[nN][oO]", tail in "[ ,\\.][a-z ,]{0,20}") {
        let reply = format!("{prefix}{word}{tail}");
        let expected = if word.eq_ignore_ascii_case("yes") { Verdict::Yes } else { Verdict::No };
        prop_assert_eq!(parse_verdict(&reply), expected);
        prop_assert_eq!(parse_verdict(&format!("[Concurrent bug or not]: {reply}")), expected);
    }

    #[test]
    fn other_first_words_are_unparseable(word in "[a-z]{1,8}") {
        prop_assume!(word != "yes" && word != "no");
        prop_assert_eq!(parse_verdict(&format!("{word} yes")), Verdict::Unparseable);
        prop_assert!(!parse_verdict(&word).is_positive());
    }

    #[test]
    fn model_text_preserves_every_bit(weights in prop::collection::vec(-1e3f64..1e3, 1..20), bias in -50.0f64..50.0, kind in 0usize..3) {
        let kind = [ModelKind::NaiveBayes, ModelKind::LogisticRegression, ModelKind::LinearSvm][kind];
        let model = TrainedModel {
            kind,
            layout_hash: "abc".into(),
            hyperparameters: Hyperparameters::default(),
            seed: 7,
            final_loss: 0.25,
            bias,
            weights,
        };
        let back = TrainedModel::from_text(&model.to_text()).unwrap();
        prop_assert_eq!(back.bias.to_bits(), model.bias.to_bits());
        prop_assert!(back.weights.iter().zip(&model.weights).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(back.to_text(), model.to_text());
    }

    #[test]
    fn rebalancing_keeps_originals_and_reaches_target(
        rows in prop::collection::vec(prop::collection::vec(0u8..2, 6), 4..40),
        n_pos in 1usize..4,
        ratio in 0.2f64..1.0,
        smote in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let n_pos = n_pos.min(rows.len() - 1);
        let labels: Vec<bool> = (0..rows.len()).map(|i| i < n_pos).collect();
        let data = TrainingSet::new("h", rows.clone(), labels.clone()).unwrap();
        let method = if smote { Rebalance::Smote } else { Rebalance::RandomOversample };
        let out = rebalance(&data, method, ratio, seed).unwrap();
        prop_assert_eq!(&out.rows[..rows.len()], &rows[..]);
        prop_assert_eq!(&out.labels[..labels.len()], &labels[..]);
        prop_assert!(out.rows.iter().flatten().all(|&b| b <= 1));
        let minority = data.positives().min(data.len() - data.positives());
        let majority = data.len() - minority;
        let added = out.len() - data.len();
        let wanted = ((ratio * majority as f64).ceil() as usize).saturating_sub(minority);
        prop_assert_eq!(added, wanted);
        prop_assert_eq!(rebalance(&data, method, ratio, seed).unwrap(), out);
    }

    #[test]
    fn downsampling_keeps_positives(seed in any::<u64>(), fraction in 0.05f64..0.5) {
        let dataset = generate(&SynthConfig { reports: 80, positive_fraction: 0.05, seed, ..SynthConfig::default() }).dataset;
        let pos = dataset.positives();
        match downsample_to_prevalence(&dataset, fraction, seed) {
            Ok(d) => {
                prop_assert_eq!(d.positives(), pos);
                let neg = d.len() - pos;
                prop_assert_eq!(neg, (pos as f64 * (1.0 - fraction) / fraction).round() as usize);
                let ids: Vec<&str> = d.reports.iter().map(|r| r.id.as_str()).collect();
                let mut sorted = ids.clone();
                sorted.sort();
                prop_assert_eq!(ids, sorted);
            }
            Err(_) => prop_assert!((pos as f64 * (1.0 - fraction) / fraction).round() as usize > dataset.len() - pos),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn adding_levels_never_unflags_a_report(seed in any::<u64>(), mask_a in 1u8..16, mask_b in 1u8..16) {
        let dataset = generate(&SynthConfig { reports: 40, positive_fraction: 0.3, seed, ..SynthConfig::default() }).dataset;
        let levels = |mask: u8| -> Vec<Level> { Level::ALL.into_iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, l)| l).collect() };
        let small = levels(mask_a & mask_b);
        let large = levels(mask_a | mask_b);
        let pipeline = Pipeline::default_pipeline();
        for m in pipeline.match_dataset(&dataset, 2) {
            let a = classify_by_levels(&m, &small).predicted.is_positive();
            let b = classify_by_levels(&m, &large).predicted.is_positive();
            prop_assert!(!a || b);
        }
    }

    #[test]
    fn parallel_matching_equals_sequential(seed in any::<u64>(), jobs in 2usize..6) {
        let dataset: Dataset = generate(&SynthConfig { reports: 30, positive_fraction: 0.3, seed, ..SynthConfig::default() }).dataset;
        let pipeline = Pipeline::default_pipeline();
        prop_assert_eq!(pipeline.match_dataset(&dataset, jobs), pipeline.match_dataset(&dataset, 1));
    }

    #[test]
    fn training_is_deterministic_and_threshold_consistent(
        rows in prop::collection::vec(prop::collection::vec(0u8..2, 5), 6..30),
        kind in 0usize..3,
    ) {
        let labels: Vec<bool> = (0..rows.len()).map(|i| i % 2 == 0).collect();
        let data = TrainingSet::new("d", rows.clone(), labels).unwrap();
        let kind = [ModelKind::NaiveBayes, ModelKind::LogisticRegression, ModelKind::LinearSvm][kind];
        let hp = Hyperparameters { epochs: 50, ..Hyperparameters::default() };
        let a = train(kind, &data, &hp, 1).unwrap();
        let b = train(kind, &data, &hp, 1).unwrap();
        prop_assert_eq!(a.to_text(), b.to_text());
        for x in &rows {
            let z = a.margin(x);
            let s = 1.0 / (1.0 + (-z).exp());
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }
}
