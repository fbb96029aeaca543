// SPDX-License-Identifier: Apache-2.0

//! `lingpat` command-line entry point.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error,
//! 4 LLM endpoint error.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "lingpat",
    version,
    about = "Identify concurrency bug reports with linguistic patterns",
    after_help = "Settings resolve as: command-line flag, then --config file, then built-in default.\n\
                  The LLM API key is read from LINGPAT_LLM_KEY only."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration file
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel stages
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Seed for every randomized step
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Lexicon file (default: built-in lexicon)
    #[arg(long, global = true, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,
    /// Pattern-set file (default: built-in pattern set)
    #[arg(long, global = true, value_name = "FILE")]
    pub patterns: Option<PathBuf>,
    /// Directory that relative output paths are resolved against
    #[arg(long, global = true, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
    /// Increase log verbosity (repeatable)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    /// Canonical dataset file
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    /// Dataset format: jsonl, github or jira
    #[arg(long)]
    pub format: Option<String>,
    /// Reuse match reports written by `lingpat match`
    #[arg(long, value_name = "FILE")]
    pub from_match: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// Model kind: nb, lr or svm
    #[arg(long)]
    pub kind: Option<String>,
    /// Class rebalancing: none, oversample or smote
    #[arg(long)]
    pub rebalance: Option<String>,
    /// Minority to majority ratio after rebalancing
    #[arg(long)]
    pub target_ratio: Option<f64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Naive Bayes smoothing
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Decision threshold on the model score
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct LlmArgs {
    /// Chat-completion endpoint URL
    #[arg(long, value_name = "URL")]
    pub llm_url: Option<String>,
    /// Model name sent to the endpoint
    #[arg(long)]
    pub llm_model: Option<String>,
    /// Transcript file of recorded prompts and replies
    #[arg(long, value_name = "FILE")]
    pub transcript: Option<PathBuf>,
    /// live, replay or replay-or-live
    #[arg(long)]
    pub mode: Option<String>,
    /// Exemplars per pattern level in each prompt
    #[arg(long)]
    pub exemplars: Option<usize>,
    /// Reject prompts estimated above this many tokens
    #[arg(long)]
    pub max_prompt_tokens: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled synthetic corpus
    Synth {
        #[arg(long, default_value_t = 300)]
        reports: usize,
        #[arg(long, default_value_t = 0.05)]
        positive_fraction: f64,
        #[arg(long, default_value = "SYN")]
        id_prefix: String,
        /// Dataset output file
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
        /// Sentence-label output file
        #[arg(long, value_name = "FILE")]
        sentence_labels: Option<PathBuf>,
    },
    /// Convert a tracker export to the canonical dataset format
    Ingest {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Input format: github, jira or jsonl
        #[arg(long)]
        format: Option<String>,
        /// Project name for every report (default: input file stem)
        #[arg(long)]
        project: Option<String>,
        /// Tracker label marking a concurrency report (repeatable)
        #[arg(long = "positive-label", value_name = "NAME")]
        positive_labels: Vec<String>,
        /// Tracker label marking a non-concurrency report (repeatable)
        #[arg(long = "negative-label", value_name = "NAME")]
        negative_labels: Vec<String>,
        /// Label for records matching neither list
        #[arg(long)]
        fallback_label: Option<String>,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Split a dataset into train/eval ids
    Split {
        #[command(flatten)]
        data: DataArgs,
        /// ratio or kfold
        #[arg(long, default_value = "kfold")]
        strategy: String,
        /// Training share for the ratio strategy
        #[arg(long, default_value_t = 0.8)]
        ratio: f64,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Drop negatives until positives reach a target prevalence
    Downsample {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        positive_fraction: f64,
        /// Keep only reports created at or after this RFC 3339 time
        #[arg(long)]
        created_after: Option<String>,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Segment, tag and lemmatize every report
    Preprocess {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Match every report against the pattern set
    Match {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Mine phrase-template candidates from concurrency sentences
    Mine {
        #[command(flatten)]
        data: DataArgs,
        /// Sentence labels; without them every sentence of a positive report is used
        #[arg(long, value_name = "FILE")]
        sentence_labels: Option<PathBuf>,
        /// Slots per candidate (2 or 3)
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.10)]
        min_support: f64,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Train a classifier on pattern features
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Feature levels, comma separated (word, phrase, sentence, br, all)
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<String>>,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Classify reports with a trained model or by pattern matching
    Classify {
        #[command(flatten)]
        data: DataArgs,
        /// Trained model; without it reports are classified by matching
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        /// Matching levels, comma separated (default: br)
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<String>>,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Build pattern-guided prompts
    Prompt {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        llm: LlmArgs,
        /// Exemplar levels, comma separated (default: all)
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<String>>,
        /// Build the baseline prompt with no exemplars
        #[arg(long, conflicts_with = "levels")]
        no_exemplars: bool,
        /// Only these report ids (repeatable)
        #[arg(long = "report-id", value_name = "ID")]
        report_ids: Vec<String>,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Write pattern-enriched fine-tuning records
    ExportFinetune {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Evaluate matching, classifiers and optionally an LLM
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        llm: LlmArgs,
        /// Evaluated levels, comma separated (default: all four). Matching
        /// gets one row per level; models use the union as features.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<String>>,
        /// Methods: matching, nb, lr, svm, llm; models take +oversample or +smote
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        #[arg(long)]
        folds: Option<usize>,
        /// Output format: plain, markdown or csv
        #[arg(long = "report-format")]
        report_format: Option<String>,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
        /// Also write the report as JSON
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
        /// CSV metrics from another run on the same dataset to add as rows (repeatable)
        #[arg(long = "merge", value_name = "FILE")]
        merge: Vec<PathBuf>,
    },
    /// Lexicon and pattern saturation over labeled sentences
    Saturate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_name = "FILE")]
        sentence_labels: Option<PathBuf>,
        /// tenths or project
        #[arg(long)]
        unit: Option<String>,
        /// Share of reports whose sentences are held out
        #[arg(long)]
        heldout_fraction: Option<f64>,
        /// Output format: plain, markdown or csv
        #[arg(long = "report-format")]
        report_format: Option<String>,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
    },
    /// Check the configuration and every referenced input
    Validate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_name = "FILE")]
        sentence_labels: Option<PathBuf>,
    },
    /// Lexicon utilities
    Lexicon {
        #[command(subcommand)]
        command: LexiconCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum LexiconCommand {
    /// Parse a lexicon file and report warnings
    Validate {
        /// Lexicon file (default: --lexicon or the built-in lexicon)
        path: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(cli, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lingpat: {e}");
            ExitCode::from(e.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
