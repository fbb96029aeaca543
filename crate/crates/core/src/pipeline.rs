// SPDX-License-Identifier: Apache-2.0

//! Text processing and matching over whole datasets, optionally in parallel.

use crate::corpus::{Dataset, IssueReport};
use crate::lexicon::Lexicon;
use crate::patterns::{MatchReport, Matcher, PatternSet};
use crate::textproc::{ProcessedSentence, TextProcessor};

/// Apply `f` to every item with up to `jobs` threads. Output keeps input
/// order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| {
                let f = &f;
                s.spawn(move || c.iter().map(f).collect::<Vec<R>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

pub struct Pipeline {
    processor: TextProcessor,
    matcher: Matcher,
}

impl Pipeline {
    pub fn new(lexicon: Lexicon, patterns: PatternSet) -> Pipeline {
        Pipeline {
            processor: TextProcessor::new(lexicon.clone()),
            matcher: Matcher::new(lexicon, patterns),
        }
    }

    pub fn default_pipeline() -> Pipeline {
        Pipeline::new(Lexicon::default_lexicon(), PatternSet::default_set())
    }

    pub fn processor(&self) -> &TextProcessor {
        &self.processor
    }

    pub fn matcher(&self) -> &Matcher {
        &self.matcher
    }

    pub fn patterns(&self) -> &PatternSet {
        self.matcher.patterns()
    }

    pub fn lexicon(&self) -> &Lexicon {
        self.matcher.lexicon()
    }

    pub fn match_one(&self, report: &IssueReport) -> MatchReport {
        let sentences = self.processor.process_report(report);
        self.matcher.match_report(&report.id, &sentences)
    }

    pub fn process(&self, dataset: &Dataset, jobs: usize) -> Vec<Vec<ProcessedSentence>> {
        parallel_map(&dataset.reports, jobs, |r| self.processor.process_report(r))
    }

    /// One match report per dataset report, in dataset order.
    pub fn match_dataset(&self, dataset: &Dataset, jobs: usize) -> Vec<MatchReport> {
        parallel_map(&dataset.reports, jobs, |r| self.match_one(r))
    }
}
