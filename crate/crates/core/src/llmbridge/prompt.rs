// SPDX-License-Identifier: Apache-2.0

//! Few-shot prompt construction from linguistic-pattern exemplars.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::verdict::CLASSIFICATION_CUE;
use super::LlmError;
use crate::corpus::IssueReport;
use crate::patterns::{Level, LinguisticPattern, MatchReport, PatternSet, Template};

pub const INSTRUCTION: &str = "Instruction: Follow the given linguistic patterns as reference examples. \
Analyze the provided bug report and determine whether it describes a concurrency bug. \
Base your reasoning on the relationship between the report content and the patterns.";

pub const DEFAULT_MAX_PROMPT_TOKENS: usize = 8192;

/// Prompt tag for an exemplar level, e.g. `pattern:word`.
pub fn level_tag(level: Level) -> String {
    format!("pattern:{}", level.as_str())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptConfig {
    pub exemplars_per_level: BTreeMap<Level, usize>,
    pub seed: u64,
    /// Upper bound on the estimated prompt size (characters / 4).
    pub max_prompt_tokens: usize,
}

impl Default for PromptConfig {
    fn default() -> Self {
        PromptConfig::uniform(1, 0)
    }
}

impl PromptConfig {
    pub fn uniform(count: usize, seed: u64) -> PromptConfig {
        PromptConfig {
            exemplars_per_level: Level::ALL.iter().map(|l| (*l, count)).collect(),
            seed,
            max_prompt_tokens: DEFAULT_MAX_PROMPT_TOKENS,
        }
    }

    /// Exemplars only for `levels`; the others get none.
    pub fn for_levels(levels: &[Level], count: usize, seed: u64) -> PromptConfig {
        let mut c = PromptConfig::uniform(0, seed);
        for l in levels {
            c.exemplars_per_level.insert(*l, count);
        }
        c
    }

    pub fn count(&self, level: Level) -> usize {
        self.exemplars_per_level.get(&level).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    /// `(level tag, payload)` in rendered order.
    pub exemplars: Vec<(String, String)>,
    pub target_report_text: String,
    pub rendered: String,
    pub seed: u64,
}

impl PromptBundle {
    /// Size estimate used for the prompt budget.
    pub fn estimated_tokens(&self) -> usize {
        estimate_tokens(&self.rendered)
    }
}

pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Exemplar text for a pattern: the term for word patterns, otherwise the
/// stored example, falling back to the description and name.
pub fn exemplar_payload(p: &LinguisticPattern) -> String {
    let text = match &p.template {
        Template::Word(t) if p.example.is_empty() => t.term.join(" "),
        _ if !p.example.is_empty() => p.example.clone(),
        _ if !p.description.is_empty() => p.description.clone(),
        _ => p.name().unwrap_or(&p.id).to_string(),
    };
    one_line(&text)
}

/// Target text as it appears in the `[bug report]` block.
pub fn report_text(report: &IssueReport) -> String {
    let text = one_line(&format!("{} {}", report.title, report.body));
    // keep the block and the cue unique in the rendered prompt
    text.replace("[bug report]", "(bug report)")
        .replace(CLASSIFICATION_CUE, "(Concurrent bug or not):")
}

/// Build a prompt for `report`. Patterns hit in `matches` are preferred as
/// exemplars; within the matched and unmatched groups the order is a seeded
/// shuffle.
pub fn build_prompt(
    patterns: &PatternSet,
    report: &IssueReport,
    matches: Option<&MatchReport>,
    config: &PromptConfig,
) -> Result<PromptBundle, LlmError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let hit = matches.map(|m| m.hit_ids()).unwrap_or_default();
    let mut exemplars = Vec::new();
    for level in Level::ALL {
        let want = config.count(level);
        let pool: Vec<&LinguisticPattern> = patterns.level(level).collect();
        if want > pool.len() {
            return Err(LlmError::InsufficientExemplars {
                level,
                requested: want,
                available: pool.len(),
            });
        }
        let (mut matched, mut rest): (Vec<_>, Vec<_>) = pool.into_iter().partition(|p| hit.contains(p.id.as_str()));
        matched.shuffle(&mut rng);
        rest.shuffle(&mut rng);
        for p in matched.into_iter().chain(rest).take(want) {
            exemplars.push((level_tag(level), exemplar_payload(p)));
        }
    }
    let target = report_text(report);
    let mut rendered = String::from(INSTRUCTION);
    rendered.push('\n');
    for (tag, payload) in &exemplars {
        rendered.push_str(&format!("[{tag}] {payload}\n"));
    }
    rendered.push_str(&format!("[bug report] {target}\n{CLASSIFICATION_CUE}"));
    let bundle = PromptBundle {
        exemplars,
        target_report_text: target,
        rendered,
        seed: config.seed,
    };
    let estimated = bundle.estimated_tokens();
    if estimated > config.max_prompt_tokens {
        return Err(LlmError::PromptTooLong {
            estimated,
            limit: config.max_prompt_tokens,
        });
    }
    Ok(bundle)
}
