// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic issue-report corpora with sentence-level labels.
//!
//! Reports are assembled from sentence pools with known roles, so corpora
//! of any size and prevalence exercise every matching level, including
//! keyword-free concurrency reports and keyword-bearing non-concurrency
//! reports.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, IssueReport, Label, SentenceLabel, Source};

/// What a pool sentence is built to trigger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Concurrency sentence that matches a sentence pattern.
    Concurrency,
    /// Concurrency sentence with keywords but no sentence pattern.
    KeywordOnly,
    /// Concurrency sentence without any keyword.
    KeywordFree,
    /// Unrelated sentence with a keyword in another sense.
    FalseFriend,
    /// Unrelated sentence that still matches a sentence pattern.
    HardNegative,
    /// Unrelated sentence without keywords.
    Neutral,
}

impl Role {
    pub fn is_concurrency_related(self) -> bool {
        matches!(self, Role::Concurrency | Role::KeywordOnly | Role::KeywordFree)
    }
}

pub const COMPONENTS: &[&str] = &[
    "cache",
    "session store",
    "index writer",
    "upload service",
    "config loader",
    "metrics reporter",
    "event dispatcher",
    "search index",
    "payment module",
    "report exporter",
];

const CONCURRENCY: &[&str] = &[
    "The worker thread hangs while waiting for the lock in the {c}.",
    "Two threads modify the {c} concurrently.",
    "A race condition occurs when two requests update the {c}.",
    "The deadlock happens during shutdown of the {c}.",
    "Thread A acquires the lock but never releases it.",
    "The consumer thread throws InterruptedException when the {c} stops.",
    "Missing synchronization lets the thread read a stale value from the {c}.",
    "The caller thread waits forever for the {c} to finish.",
    "Two transactions overwrite each other in the {c}.",
    "There is an atomicity violation in the {c} update path.",
    "The {c} thread is stuck after the second request.",
    "A deadlock between the flush thread and the {c} lock freezes the service.",
    "The lock is held by the {c} while it calls back into the listener.",
    "An unlucky interleaving of the two threads corrupts the {c}.",
    "The {c} calls tryLock() on the lock and never returns.",
];

const KEYWORD_ONLY: &[&str] = &[
    "Attached is a thread dump from the {c} host.",
    "We suspect a deadlock in the {c}.",
    "This looks like a race in the {c}.",
    "The thread pool of the {c} is configured with eight workers.",
    "See the lock ordering notes for the {c}.",
];

const KEYWORD_FREE: &[&str] = &[
    "Two requests update the {c} counter at the same time and one update is lost.",
    "The value read by the second request is stale after the first write.",
    "The {c} sometimes returns a partially written record under load.",
    "Both callbacks read the old value before either one writes.",
];

const FALSE_FRIEND: &[&str] = &[
    "The lock screen does not appear after the {c} update.",
    "The phone is locked after five minutes of inactivity.",
    "Does this lock support fairness?",
    "Please open a new thread on the forum about the {c}.",
    "The documentation of the {c} mentions thread safety.",
    "Transaction history is shown on the {c} dashboard.",
    "The settings page shows a lock icon next to the {c}.",
    "The race results page of the {c} shows wrong times.",
    "The thread title is truncated in the {c} view.",
];

const HARD_NEGATIVE: &[&str] = &[
    "Deleting the stale lock file fixes the {c} error.",
    "The build thread fails with an error when the {c} path is missing.",
];

const NEUTRAL: &[&str] = &[
    "The {c} shows the wrong label after login.",
    "Steps to reproduce are listed below.",
    "The button text in the {c} is misaligned.",
    "Upgrading to the latest version fixes the {c} problem.",
    "The {c} crashes when the input file is empty.",
    "Expected behavior is a clear message.",
    "The {c} ignores the timezone setting.",
    "Logs are attached for the {c}.",
    "The export produces an invalid file name.",
    "This started after the last release of the {c}.",
];

const POSITIVE_TITLES: &[&str] = &[
    "Deadlock in {c}",
    "{c} hangs under load",
    "Intermittent failure in {c} tests",
    "Race in {c} update",
    "Lost update in {c}",
    "{c} becomes unresponsive",
];

const NEGATIVE_TITLES: &[&str] = &[
    "{c} shows wrong label",
    "Crash when opening {c} settings",
    "Lock icon hidden in {c}",
    "Typo in {c} docs",
    "{c} ignores timezone",
    "Thread view broken in {c}",
    "Slow startup of {c}",
];

/// Every pool sentence with its role, before slot filling.
pub fn sentence_pool() -> Vec<(Role, &'static str)> {
    let pools: [(Role, &[&str]); 6] = [
        (Role::Concurrency, CONCURRENCY),
        (Role::KeywordOnly, KEYWORD_ONLY),
        (Role::KeywordFree, KEYWORD_FREE),
        (Role::FalseFriend, FALSE_FRIEND),
        (Role::HardNegative, HARD_NEGATIVE),
        (Role::Neutral, NEUTRAL),
    ];
    pools.iter().flat_map(|(r, p)| p.iter().map(move |s| (*r, *s))).collect()
}

pub fn fill(template: &str, component: &str) -> String {
    let mut out = template.replace("{c}", component);
    if let Some(first) = out.chars().next() {
        if first.is_lowercase() {
            out = first.to_uppercase().chain(out.chars().skip(1)).collect();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub reports: usize,
    pub positive_fraction: f64,
    pub seed: u64,
    pub projects: Vec<String>,
    /// Body sentence count range, inclusive.
    pub min_body_sentences: usize,
    pub max_body_sentences: usize,
    /// Share of positives written without concurrency keywords.
    pub keyword_free_rate: f64,
    /// Share of positives whose only concurrency evidence is keywords.
    pub keyword_only_rate: f64,
    /// Share of negatives containing a keyword in an unrelated sense.
    pub false_friend_rate: f64,
    /// Share of negatives that match a sentence pattern.
    pub hard_negative_rate: f64,
    pub id_prefix: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            reports: 300,
            positive_fraction: 0.05,
            seed: 2024,
            projects: ["atlas", "beacon", "cobalt", "delta", "ember", "fjord"].map(String::from).to_vec(),
            min_body_sentences: 2,
            max_body_sentences: 5,
            keyword_free_rate: 0.03,
            keyword_only_rate: 0.27,
            false_friend_rate: 0.3,
            hard_negative_rate: 0.015,
            id_prefix: "SYN".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub dataset: Dataset,
    /// One label per generated sentence, title included (index 0).
    pub sentence_labels: Vec<SentenceLabel>,
}

impl SynthCorpus {
    pub fn concurrency_sentences(&self) -> impl Iterator<Item = &SentenceLabel> {
        self.sentence_labels.iter().filter(|l| l.is_concurrency_related)
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool.choose(rng).expect("pool non-empty")
}

/// A pool sentence not yet used in this report, when one is left.
fn pick_fresh(rng: &mut ChaCha8Rng, pool: &[&str], taken: &[(Role, String)], component: &str) -> String {
    let fresh: Vec<&str> = pool
        .iter()
        .copied()
        .filter(|t| {
            let filled = fill(t, component);
            taken.iter().all(|(_, s)| *s != filled)
        })
        .collect();
    let source = if fresh.is_empty() { pool } else { &fresh[..] };
    fill(pick(rng, source), component)
}

/// Deterministic per configuration. Positives are spread evenly through the
/// id sequence; the positive count is `round(reports · positive_fraction)`.
pub fn generate(config: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.reports;
    let positives = ((n as f64) * config.positive_fraction).round() as usize;
    let mut is_positive = vec![false; n];
    is_positive[..positives.min(n)].fill(true);
    is_positive.shuffle(&mut rng);
    let width = n.max(1).to_string().len();
    let mut reports = Vec::with_capacity(n);
    let mut labels = Vec::new();
    for (i, &positive) in is_positive.iter().enumerate() {
        let id = format!("{}-{:0width$}", config.id_prefix, i + 1);
        let project = config.projects.get(i % config.projects.len().max(1)).cloned().unwrap_or_default();
        let component = pick(&mut rng, COMPONENTS);
        let body_len = rng.gen_range(config.min_body_sentences..=config.max_body_sentences.max(config.min_body_sentences));
        let mut sentences: Vec<(Role, String)> = Vec::new();
        let title;
        if positive {
            let draw: f64 = rng.gen();
            let style = if draw < config.keyword_free_rate {
                Role::KeywordFree
            } else if draw < config.keyword_free_rate + config.keyword_only_rate {
                Role::KeywordOnly
            } else {
                Role::Concurrency
            };
            title = match style {
                Role::KeywordFree => fill(pick(&mut rng, &["{c} loses data", "Lost update in {c}", "{c} returns stale value"]), component),
                Role::KeywordOnly => fill(pick(&mut rng, &["Possible deadlock in {c}", "{c} slow with thread pool", "Race in {c}?"]), component),
                _ => fill(pick(&mut rng, POSITIVE_TITLES), component),
            };
            let pool = match style {
                Role::KeywordFree => KEYWORD_FREE,
                Role::KeywordOnly => KEYWORD_ONLY,
                _ => CONCURRENCY,
            };
            let core = rng.gen_range(1..=2.min(body_len.max(1)));
            for _ in 0..core {
                let s = pick_fresh(&mut rng, pool, &sentences, component);
                sentences.push((style, s));
            }
            while sentences.len() < body_len {
                let s = pick_fresh(&mut rng, NEUTRAL, &sentences, component);
                sentences.push((Role::Neutral, s));
            }
        } else {
            title = fill(pick(&mut rng, NEGATIVE_TITLES), component);
            let draw: f64 = rng.gen();
            if draw < config.hard_negative_rate {
                sentences.push((Role::HardNegative, fill(pick(&mut rng, HARD_NEGATIVE), component)));
            } else if draw < config.hard_negative_rate + config.false_friend_rate {
                sentences.push((Role::FalseFriend, fill(pick(&mut rng, FALSE_FRIEND), component)));
            }
            while sentences.len() < body_len {
                let s = pick_fresh(&mut rng, NEUTRAL, &sentences, component);
                sentences.push((Role::Neutral, s));
            }
        }
        sentences.shuffle(&mut rng);
        let title_related = positive && title_is_related(&title);
        labels.push(SentenceLabel {
            report_id: id.clone(),
            sentence_index: 0,
            is_concurrency_related: title_related,
        });
        for (k, (role, _)) in sentences.iter().enumerate() {
            labels.push(SentenceLabel {
                report_id: id.clone(),
                sentence_index: k + 1,
                is_concurrency_related: positive && role.is_concurrency_related(),
            });
        }
        reports.push(IssueReport {
            id,
            project,
            title,
            body: sentences.into_iter().map(|(_, s)| s).collect::<Vec<_>>().join(" "),
            label: if positive { Label::Concurrency } else { Label::NonConcurrency },
            source: Source::Synthetic,
            created_at: None,
        });
    }
    SynthCorpus {
        dataset: Dataset::new(reports),
        sentence_labels: labels,
    }
}

fn title_is_related(title: &str) -> bool {
    let t = title.to_lowercase();
    ["deadlock", "hang", "race", "lost update", "stale", "loses data", "unresponsive", "intermittent", "thread pool"]
        .iter()
        .any(|k| t.contains(k))
}
