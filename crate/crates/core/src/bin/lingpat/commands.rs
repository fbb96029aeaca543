// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::Serialize;

use lingpat::classify::{
    classify_by_levels, predict, rebalance, train, FeatureLayout, ModelKind, Rebalance, TrainedModel, TrainingSet,
    vectorize_with,
};
use lingpat::config::{parse_levels, ConfigError, RunConfig};
use lingpat::corpus::{
    filter_post_cutoff, load_dataset, load_dataset_with, load_sentence_labels, save_dataset, save_sentence_labels,
    split_ratio, stratified_kfold, downsample_to_prevalence, validate_sentence_labels, Dataset, Label, LabelRule,
    SentenceLabel,
};
use lingpat::eval::{
    cross_validate, llm_eval, render_report, render_saturation, saturation_from_labels, EvalReport, Method,
    MethodSpec, ReportFormat,
};
use lingpat::lexicon::Lexicon;
use lingpat::llmbridge::{
    build_prompt, export_finetune_file, HttpBackend, LlmClient, PromptBundle, PromptConfig, QueryMode, Transcript,
};
use lingpat::manifest::Manifest;
use lingpat::patterns::{mine_phrase_candidates, Level, MatchReport, PatternSet, SaturationConfig};
use lingpat::pipeline::Pipeline;
use lingpat::synth::{generate, SynthConfig};
use lingpat::textproc::ProcessedSentence;

use crate::error::CliError;
use crate::{Cli, Command, DataArgs, LexiconCommand, LlmArgs, ModelArgs};

type Result<T> = std::result::Result<T, CliError>;

fn apply_data(f: &mut RunConfig, d: &DataArgs) {
    f.data.dataset = d.dataset.clone();
    f.data.format = d.format.clone();
    f.data.matches = d.from_match.clone();
}

fn apply_model(f: &mut RunConfig, m: &ModelArgs) {
    f.model.kind = m.kind.clone();
    f.model.rebalance = m.rebalance.clone();
    f.model.target_ratio = m.target_ratio;
    f.model.learning_rate = m.learning_rate;
    f.model.l2 = m.l2;
    f.model.epochs = m.epochs;
    f.model.alpha = m.alpha;
    f.model.threshold = m.threshold;
}

fn apply_llm(f: &mut RunConfig, l: &LlmArgs) {
    f.llm.url = l.llm_url.clone();
    f.llm.model = l.llm_model.clone();
    f.llm.transcript = l.transcript.clone();
    f.llm.mode = l.mode.clone();
    f.llm.exemplars = l.exemplars;
    f.llm.max_prompt_tokens = l.max_prompt_tokens;
}

/// The configuration expressed by command-line flags alone.
fn flag_config(cli: &Cli) -> RunConfig {
    let g = &cli.global;
    let mut f = RunConfig::default();
    f.run.seed = g.seed;
    f.run.jobs = g.jobs;
    f.run.output_dir = g.output_dir.clone();
    f.data.lexicon = g.lexicon.clone();
    f.data.patterns = g.patterns.clone();
    match &cli.command {
        Command::Synth { .. } | Command::Lexicon { .. } => {}
        Command::Ingest { format, .. } => f.data.format = format.clone(),
        Command::Split { data, folds, .. } => {
            apply_data(&mut f, data);
            f.eval.folds = *folds;
        }
        Command::Downsample { data, .. }
        | Command::Preprocess { data, .. }
        | Command::Match { data, .. }
        | Command::Classify { data, .. }
        | Command::ExportFinetune { data, .. } => apply_data(&mut f, data),
        Command::Mine { data, sentence_labels, .. } | Command::Validate { data, sentence_labels } => {
            apply_data(&mut f, data);
            f.data.sentence_labels = sentence_labels.clone();
        }
        Command::Train { data, model, levels, .. } => {
            apply_data(&mut f, data);
            apply_model(&mut f, model);
            f.model.levels = levels.clone();
        }
        Command::Prompt { data, llm, .. } => {
            apply_data(&mut f, data);
            apply_llm(&mut f, llm);
        }
        Command::Eval {
            data,
            model,
            llm,
            levels,
            methods,
            folds,
            report_format,
            ..
        } => {
            apply_data(&mut f, data);
            apply_model(&mut f, model);
            apply_llm(&mut f, llm);
            f.eval.levels = levels.clone();
            f.eval.methods = methods.clone();
            f.eval.folds = *folds;
            f.eval.format = report_format.clone();
        }
        Command::Saturate {
            data,
            sentence_labels,
            unit,
            heldout_fraction,
            report_format,
            ..
        } => {
            apply_data(&mut f, data);
            f.data.sentence_labels = sentence_labels.clone();
            f.eval.saturation_unit = unit.clone();
            f.eval.heldout_fraction = *heldout_fraction;
            f.eval.format = report_format.clone();
        }
    }
    f
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Synth { .. } => "synth",
        Command::Ingest { .. } => "ingest",
        Command::Split { .. } => "split",
        Command::Downsample { .. } => "downsample",
        Command::Preprocess { .. } => "preprocess",
        Command::Match { .. } => "match",
        Command::Mine { .. } => "mine",
        Command::Train { .. } => "train",
        Command::Classify { .. } => "classify",
        Command::Prompt { .. } => "prompt",
        Command::ExportFinetune { .. } => "export-finetune",
        Command::Eval { .. } => "eval",
        Command::Saturate { .. } => "saturate",
        Command::Validate { .. } => "validate",
        Command::Lexicon { .. } => "lexicon validate",
    }
}

struct Ctx {
    cfg: RunConfig,
    manifest: Manifest,
}

impl Ctx {
    fn jobs(&self) -> usize {
        self.cfg.jobs()
    }

    fn seed(&self) -> u64 {
        self.cfg.seed()
    }

    fn output(&self, path: &Path) -> Result<PathBuf> {
        let p = self.cfg.output_path(path);
        if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        Ok(p)
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.manifest.input(path)?;
        Ok(())
    }

    fn record(&mut self, path: &Path) -> Result<()> {
        self.manifest.output(path)?;
        Ok(())
    }

    fn write_text(&mut self, path: &Path, text: &str) -> Result<PathBuf> {
        let p = self.output(path)?;
        std::fs::write(&p, text)?;
        self.record(&p)?;
        Ok(p)
    }

    fn write_jsonl<T: Serialize>(&mut self, path: &Path, items: &[T]) -> Result<PathBuf> {
        let mut text = String::new();
        for item in items {
            text.push_str(&serde_json::to_string(item)?);
            text.push('\n');
        }
        self.write_text(path, &text)
    }

    fn pipeline(&mut self) -> Result<Pipeline> {
        let lexicon = match self.cfg.data.lexicon.clone() {
            Some(p) => {
                let (lex, warnings) = Lexicon::load(&p)?;
                for w in warnings {
                    log::warn!("{}: {w}", p.display());
                }
                self.input(&p)?;
                lex
            }
            None => Lexicon::default_lexicon(),
        };
        let patterns = match self.cfg.data.patterns.clone() {
            Some(p) => {
                let set = PatternSet::load(&p)?;
                self.input(&p)?;
                set
            }
            None => PatternSet::default_set(),
        };
        self.manifest.version("lexicon", lexicon.version.clone());
        self.manifest.version("patterns", patterns.version.clone());
        self.manifest.version("pattern_layout", patterns.layout_hash());
        Ok(Pipeline::new(lexicon, patterns))
    }

    fn dataset(&mut self) -> Result<Dataset> {
        let path = self
            .cfg
            .data
            .dataset
            .clone()
            .ok_or(ConfigError::MissingField { field: "data.dataset" })?;
        let outcome = load_dataset(&path, self.cfg.input_format()?)?;
        if let Some(q) = &outcome.quarantine_path {
            log::warn!("{} malformed records written to {}", outcome.quarantined.len(), q.display());
        }
        self.input(&path)?;
        self.manifest.version("dataset", outcome.dataset.content_hash());
        Ok(outcome.dataset)
    }

    fn sentence_labels(&mut self) -> Result<Option<Vec<SentenceLabel>>> {
        match self.cfg.data.sentence_labels.clone() {
            Some(p) => {
                let labels = load_sentence_labels(&p)?;
                self.input(&p)?;
                Ok(Some(labels))
            }
            None => Ok(None),
        }
    }

    /// Match reports from `--from-match`, or computed from the dataset.
    fn matches(&mut self, pipeline: &Pipeline, dataset: Option<&Dataset>) -> Result<Vec<MatchReport>> {
        let matches = match self.cfg.data.matches.clone() {
            Some(p) => {
                let m: Vec<MatchReport> = read_jsonl(&p)?;
                self.input(&p)?;
                let expected = pipeline.patterns().layout_hash();
                if let Some(bad) = m.iter().find(|r| r.pattern_set_hash != expected) {
                    return Err(CliError::Data(format!(
                        "{}: report {} was matched against a different pattern set",
                        p.display(),
                        bad.report_id
                    )));
                }
                m
            }
            None => {
                let ds = dataset.ok_or(ConfigError::MissingField { field: "data.dataset" })?;
                pipeline.match_dataset(ds, self.jobs())
            }
        };
        if let Some(ds) = dataset {
            let aligned = ds.len() == matches.len() && ds.reports.iter().zip(&matches).all(|(r, m)| r.id == m.report_id);
            if !aligned {
                return Err(CliError::Data("match reports do not line up with the dataset".into()));
            }
        }
        Ok(matches)
    }
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| CliError::Data(format!("{} line {}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

fn parse_enum<T: std::str::FromStr<Err = String>>(flag: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|e| CliError::usage(format!("{flag}: {e}")))
}

pub fn run(cli: Cli, args: Vec<String>) -> Result<()> {
    let started = Instant::now();
    let file = match &cli.global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = flag_config(&cli).over(&file);
    cfg.validate()?;
    let mut ctx = Ctx {
        manifest: Manifest::new(command_name(&cli.command), args, &cfg),
        cfg,
    };
    if let Some(p) = cli.global.config.clone() {
        ctx.input(&p)?;
    }
    dispatch(&mut ctx, cli.command)?;
    if !ctx.manifest.outputs.is_empty() {
        ctx.manifest.runtime_ms = started.elapsed().as_millis() as u64;
        let path = ctx.manifest.write()?;
        log::info!("manifest written to {}", path.display());
    }
    Ok(())
}

fn dispatch(ctx: &mut Ctx, command: Command) -> Result<()> {
    match command {
        Command::Synth {
            reports,
            positive_fraction,
            id_prefix,
            output,
            sentence_labels,
        } => synth(ctx, reports, positive_fraction, id_prefix, &output, sentence_labels.as_deref()),
        Command::Ingest {
            input,
            project,
            positive_labels,
            negative_labels,
            fallback_label,
            output,
            ..
        } => ingest(ctx, &input, project, positive_labels, negative_labels, fallback_label, &output),
        Command::Split {
            strategy, ratio, output, ..
        } => split(ctx, &strategy, ratio, &output),
        Command::Downsample {
            positive_fraction,
            created_after,
            output,
            ..
        } => downsample(ctx, positive_fraction, created_after.as_deref(), &output),
        Command::Preprocess { output, .. } => {
            let pipeline = ctx.pipeline()?;
            let ds = ctx.dataset()?;
            let sentences: Vec<ProcessedSentence> = pipeline.process(&ds, ctx.jobs()).into_iter().flatten().collect();
            ctx.write_jsonl(&output, &sentences)?;
            eprintln!("{} sentences from {} reports", sentences.len(), ds.len());
            Ok(())
        }
        Command::Match { output, .. } => {
            let pipeline = ctx.pipeline()?;
            let ds = ctx.dataset()?;
            let matches = pipeline.match_dataset(&ds, ctx.jobs());
            ctx.write_jsonl(&output, &matches)?;
            for level in Level::ALL {
                let n = matches.iter().filter(|m| m.has_level(level)).count();
                eprintln!("{level}: {n} of {} reports matched", matches.len());
            }
            Ok(())
        }
        Command::Mine {
            n, min_support, output, ..
        } => mine(ctx, n, min_support, &output),
        Command::Train { output, .. } => train_cmd(ctx, &output),
        Command::Classify {
            model, levels, output, ..
        } => classify(ctx, model.as_deref(), levels, &output),
        Command::Prompt {
            levels,
            no_exemplars,
            report_ids,
            output,
            ..
        } => prompt(ctx, levels, no_exemplars, report_ids, &output),
        Command::ExportFinetune { output, .. } => {
            let pipeline = ctx.pipeline()?;
            let ds = ctx.dataset()?;
            let matches = ctx.matches(&pipeline, Some(&ds))?;
            let path = ctx.output(&output)?;
            let count = export_finetune_file(&ds, &matches, pipeline.patterns(), &path)?;
            ctx.record(&path)?;
            eprintln!("{count} records written");
            Ok(())
        }
        Command::Eval { output, json, merge, .. } => eval(ctx, &output, json.as_deref(), &merge),
        Command::Saturate { output, json, .. } => saturate(ctx, &output, json.as_deref()),
        Command::Validate { .. } => validate(ctx),
        Command::Lexicon {
            command: LexiconCommand::Validate { path },
        } => lexicon_validate(ctx, path),
    }
}

fn synth(
    ctx: &mut Ctx,
    reports: usize,
    positive_fraction: f64,
    id_prefix: String,
    output: &Path,
    labels: Option<&Path>,
) -> Result<()> {
    if reports == 0 {
        return Err(CliError::usage("--reports must be at least 1"));
    }
    if !(0.0..=1.0).contains(&positive_fraction) {
        return Err(CliError::usage("--positive-fraction must lie in [0, 1]"));
    }
    let config = SynthConfig {
        reports,
        positive_fraction,
        id_prefix,
        seed: ctx.cfg.run.seed.unwrap_or(SynthConfig::default().seed),
        ..SynthConfig::default()
    };
    ctx.manifest.seed = config.seed;
    let corpus = generate(&config);
    let path = ctx.output(output)?;
    save_dataset(&path, &corpus.dataset)?;
    ctx.record(&path)?;
    if let Some(l) = labels {
        let lp = ctx.output(l)?;
        save_sentence_labels(&lp, &corpus.sentence_labels)?;
        ctx.record(&lp)?;
    }
    eprintln!(
        "{} reports, {} positive",
        corpus.dataset.len(),
        corpus.dataset.positives()
    );
    Ok(())
}

fn ingest(
    ctx: &mut Ctx,
    input: &Path,
    project: Option<String>,
    positive: Vec<String>,
    negative: Vec<String>,
    fallback: Option<String>,
    output: &Path,
) -> Result<()> {
    if !input.is_file() {
        return Err(CliError::usage(format!("--input: file {} does not exist", input.display())));
    }
    let mut rule = LabelRule::default();
    if !positive.is_empty() {
        rule.positive = positive;
    }
    rule.negative = negative;
    if let Some(f) = fallback {
        rule.fallback = parse_enum::<Label>("--fallback-label", &f)?;
    }
    let outcome = load_dataset_with(input, ctx.cfg.input_format()?, &rule)?;
    ctx.input(input)?;
    let mut ds = outcome.dataset;
    if let Some(p) = project {
        for r in &mut ds.reports {
            r.project = p.clone();
        }
    }
    let path = ctx.output(output)?;
    save_dataset(&path, &ds)?;
    ctx.record(&path)?;
    eprintln!(
        "{} reports ({} positive), {} quarantined",
        ds.len(),
        ds.positives(),
        outcome.quarantined.len()
    );
    Ok(())
}

fn split(ctx: &mut Ctx, strategy: &str, ratio: f64, output: &Path) -> Result<()> {
    let ds = ctx.dataset()?;
    let splits = match strategy {
        "ratio" => vec![split_ratio(&ds, ratio, ctx.seed())?],
        "kfold" | "k-fold" | "stratified-kfold" => stratified_kfold(&ds, ctx.cfg.folds(), ctx.seed())?,
        other => return Err(CliError::usage(format!("--strategy: unknown strategy {other:?}"))),
    };
    let text = serde_json::to_string_pretty(&splits)? + "\n";
    ctx.write_text(output, &text)?;
    Ok(())
}

fn downsample(ctx: &mut Ctx, fraction: f64, created_after: Option<&str>, output: &Path) -> Result<()> {
    let mut ds = ctx.dataset()?;
    if let Some(raw) = created_after {
        let cutoff = chrono::DateTime::parse_from_rfc3339(raw)
            .map_err(|e| CliError::usage(format!("--created-after: {e}")))?
            .with_timezone(&chrono::Utc);
        ds = filter_post_cutoff(&ds, cutoff)?;
    }
    let out = downsample_to_prevalence(&ds, fraction, ctx.seed())?;
    let path = ctx.output(output)?;
    save_dataset(&path, &out)?;
    ctx.record(&path)?;
    eprintln!("{} reports, {} positive", out.len(), out.positives());
    Ok(())
}

fn mine(ctx: &mut Ctx, n: usize, min_support: f64, output: &Path) -> Result<()> {
    let pipeline = ctx.pipeline()?;
    let ds = ctx.dataset()?;
    let labels = ctx.sentence_labels()?;
    let processed = pipeline.process(&ds, ctx.jobs());
    let sentences: Vec<ProcessedSentence> = match &labels {
        Some(labels) => {
            let related: BTreeSet<(&str, usize)> = labels
                .iter()
                .filter(|l| l.is_concurrency_related)
                .map(|l| (l.report_id.as_str(), l.sentence_index))
                .collect();
            processed
                .into_iter()
                .flatten()
                .filter(|s| related.contains(&(s.report_id.as_str(), s.index)))
                .collect()
        }
        None => ds
            .reports
            .iter()
            .zip(processed)
            .filter(|(r, _)| r.label.is_positive())
            .flat_map(|(_, s)| s)
            .collect(),
    };
    let candidates = mine_phrase_candidates(&sentences, pipeline.lexicon(), n, min_support)?;
    ctx.write_jsonl(output, &candidates)?;
    for c in candidates.iter().take(10) {
        println!("{:.3}  {}", c.support, c.label());
    }
    eprintln!("{} candidates from {} sentences", candidates.len(), sentences.len());
    Ok(())
}

fn train_cmd(ctx: &mut Ctx, output: &Path) -> Result<()> {
    let pipeline = ctx.pipeline()?;
    let ds = ctx.dataset()?;
    ds.require_labeled()?;
    let matches = ctx.matches(&pipeline, Some(&ds))?;
    let layout = FeatureLayout::new(pipeline.patterns(), &ctx.cfg.model_levels()?);
    let vectors = matches.iter().map(|m| vectorize_with(m, &layout)).collect::<std::result::Result<Vec<_>, _>>()?;
    let labels: Vec<bool> = ds.reports.iter().map(|r| r.label.is_positive()).collect();
    let data = TrainingSet::from_vectors(&vectors, &labels)?;
    let seed = ctx.seed();
    let data = rebalance(&data, ctx.cfg.rebalance()?, ctx.cfg.target_ratio(), seed)?;
    let model = train(ctx.cfg.model_kind()?, &data, &ctx.cfg.hyperparameters()?, seed)?;
    let path = ctx.output(output)?;
    model.save(&path)?;
    ctx.record(&path)?;
    eprintln!(
        "{} trained on {} rows x {} features, final loss {:.6}",
        model.kind.as_str(),
        data.len(),
        data.dim(),
        model.final_loss
    );
    Ok(())
}

fn classify(ctx: &mut Ctx, model: Option<&Path>, levels: Option<Vec<String>>, output: &Path) -> Result<()> {
    let pipeline = ctx.pipeline()?;
    let ds = match ctx.cfg.data.matches {
        Some(_) if ctx.cfg.data.dataset.is_none() => None,
        _ => Some(ctx.dataset()?),
    };
    let matches = ctx.matches(&pipeline, ds.as_ref())?;
    let results = match model {
        Some(path) => {
            if levels.is_some() {
                return Err(CliError::usage("--levels applies to matching only; the model fixes its features"));
            }
            let model = TrainedModel::load(path)?;
            ctx.input(path)?;
            let layout = FeatureLayout::for_hash(pipeline.patterns(), &model.layout_hash).ok_or_else(|| {
                CliError::Data(format!("{}: model features do not match the pattern set", path.display()))
            })?;
            matches
                .iter()
                .map(|m| Ok(predict(&model, &vectorize_with(m, &layout)?)?))
                .collect::<Result<Vec<_>>>()?
        }
        None => {
            let levels = match levels {
                Some(l) => parse_levels("--levels", &l)?,
                None => vec![Level::BugReport],
            };
            matches.iter().map(|m| classify_by_levels(m, &levels)).collect()
        }
    };
    ctx.write_jsonl(output, &results)?;
    let positive = results.iter().filter(|c| c.predicted.is_positive()).count();
    eprintln!("{positive} of {} reports classified as concurrency", results.len());
    Ok(())
}

fn prompt(ctx: &mut Ctx, levels: Option<Vec<String>>, none: bool, ids: Vec<String>, output: &Path) -> Result<()> {
    let pipeline = ctx.pipeline()?;
    let ds = ctx.dataset()?;
    let matches = ctx.matches(&pipeline, Some(&ds))?;
    let levels = match (none, levels) {
        (true, _) => Vec::new(),
        (false, Some(l)) => parse_levels("--levels", &l)?,
        (false, None) => Level::ALL.to_vec(),
    };
    let mut config = PromptConfig::for_levels(&levels, ctx.cfg.exemplars(), ctx.seed());
    config.max_prompt_tokens = ctx.cfg.max_prompt_tokens();
    let wanted: BTreeSet<&str> = ids.iter().map(String::as_str).collect();
    if let Some(missing) = wanted.iter().find(|id| ds.get(id).is_none()) {
        return Err(CliError::Data(format!("report {missing} is not in the dataset")));
    }
    let bundles = ds
        .reports
        .iter()
        .zip(&matches)
        .filter(|(r, _)| wanted.is_empty() || wanted.contains(r.id.as_str()))
        .map(|(r, m)| build_prompt(pipeline.patterns(), r, Some(m), &config))
        .collect::<std::result::Result<Vec<PromptBundle>, _>>()?;
    ctx.write_jsonl(output, &bundles)?;
    if let [one] = bundles.as_slice() {
        println!("{}", one.rendered);
    }
    eprintln!("{} prompts written", bundles.len());
    Ok(())
}

fn llm_client(ctx: &mut Ctx) -> Result<LlmClient> {
    let mode = ctx.cfg.query_mode()?;
    let transcript = match (ctx.cfg.llm.transcript.clone(), mode) {
        (Some(p), QueryMode::Replay) => {
            if !p.is_file() {
                return Err(ConfigError::MissingFile {
                    field: "llm.transcript",
                    path: p.display().to_string(),
                }
                .into());
            }
            ctx.input(&p)?;
            Transcript::load(&p)?
        }
        (Some(p), _) => Transcript::open(&p)?,
        (None, QueryMode::Replay) => return Err(ConfigError::MissingField { field: "llm.transcript" }.into()),
        (None, _) => Transcript::in_memory(),
    };
    let client = match mode {
        QueryMode::Replay => LlmClient::replay(transcript),
        _ => {
            let endpoint = ctx.cfg.endpoint();
            ctx.manifest.version("llm_model", endpoint.model.clone());
            LlmClient::new(Box::new(HttpBackend::new(endpoint.clone())), transcript, mode, &endpoint)
        }
    };
    Ok(client.with_prompt_budget(ctx.cfg.max_prompt_tokens()))
}

/// `None` stands for the LLM method.
fn parse_method(raw: &str, ctx: &Ctx) -> Result<Option<Method>> {
    let raw = raw.trim().to_ascii_lowercase();
    match raw.as_str() {
        "matching" | "match" => return Ok(Some(Method::Matching)),
        "llm" => return Ok(None),
        _ => {}
    }
    let (kind, balance) = match raw.split_once('+') {
        Some((k, b)) => (k, Some(b)),
        None => (raw.as_str(), None),
    };
    let kind: ModelKind = parse_enum("--methods", kind)?;
    let rebalance: Rebalance = match balance {
        Some(b) => parse_enum("--methods", b)?,
        None => ctx.cfg.rebalance()?,
    };
    Ok(Some(Method::Model {
        kind,
        hyperparameters: ctx.cfg.hyperparameters()?,
        rebalance,
        target_ratio: ctx.cfg.target_ratio(),
    }))
}

fn dataset_name(ctx: &Ctx) -> String {
    ctx.cfg
        .data
        .dataset
        .as_ref()
        .and_then(|p| p.file_stem())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

fn eval(ctx: &mut Ctx, output: &Path, json: Option<&Path>, merge: &[PathBuf]) -> Result<()> {
    let pipeline = ctx.pipeline()?;
    let ds = ctx.dataset()?;
    let matches = ctx.matches(&pipeline, Some(&ds))?;
    let levels = ctx.cfg.eval_levels()?;
    let methods = ctx
        .cfg
        .eval
        .methods
        .clone()
        .unwrap_or_else(|| ["matching", "nb", "lr", "svm"].map(String::from).to_vec());
    let mut specs = Vec::new();
    let mut with_llm = false;
    for raw in methods.iter().flat_map(|m| m.split(',')).filter(|m| !m.trim().is_empty()) {
        match parse_method(raw, ctx)? {
            Some(Method::Matching) => specs.extend(levels.iter().map(|l| MethodSpec::new(Method::Matching, &[*l]))),
            Some(m) => specs.push(MethodSpec::new(m, &levels)),
            None => with_llm = true,
        }
    }
    let name = dataset_name(ctx);
    let seed = ctx.seed();
    let mut report = cross_validate(&name, &ds, &matches, pipeline.patterns(), ctx.cfg.folds(), &specs, seed, ctx.jobs())?;
    if with_llm {
        let client = llm_client(ctx)?;
        let mut combos: Vec<Vec<Level>> = vec![Vec::new()];
        combos.extend(levels.iter().map(|l| vec![*l]));
        if levels.len() > 1 {
            combos.push(levels.clone());
        }
        let llm = llm_eval(&name, &ds, &matches, pipeline.patterns(), &client, &combos, ctx.cfg.exemplars(), seed)?;
        report.rows.extend(llm.rows);
    }
    for path in merge {
        ctx.manifest.input(path)?;
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        report.merge(EvalReport::from_csv(&text)?)?;
    }
    let format = ctx.cfg.report_format()?;
    let rendered = render_report(&report, format);
    ctx.write_text(output, &rendered)?;
    if let Some(j) = json {
        ctx.write_text(j, &report.to_json())?;
    }
    if format == ReportFormat::Csv {
        print!("{}", render_report(&report, ReportFormat::PlainTable));
    } else {
        print!("{rendered}");
    }
    Ok(())
}

fn saturate(ctx: &mut Ctx, output: &Path, json: Option<&Path>) -> Result<()> {
    let pipeline = ctx.pipeline()?;
    let ds = ctx.dataset()?;
    let labels = ctx
        .sentence_labels()?
        .ok_or(ConfigError::MissingField { field: "data.sentence_labels" })?;
    let processed = pipeline.process(&ds, ctx.jobs());
    let counts: BTreeMap<&str, usize> = ds.reports.iter().zip(&processed).map(|(r, s)| (r.id.as_str(), s.len())).collect();
    validate_sentence_labels(&labels, &ds, |r| counts[r.id.as_str()])?;
    let config = SaturationConfig {
        unit: ctx.cfg.saturation_unit()?,
        seed: ctx.seed(),
        ..SaturationConfig::default()
    };
    let curve = saturation_from_labels(
        &ds,
        &processed,
        &labels,
        pipeline.lexicon(),
        pipeline.patterns(),
        ctx.cfg.heldout_fraction(),
        &config,
    )?;
    let format = ctx.cfg.report_format()?;
    let rendered = render_saturation(&curve, format);
    ctx.write_text(output, &rendered)?;
    if let Some(j) = json {
        ctx.write_text(j, &(serde_json::to_string_pretty(&curve)? + "\n"))?;
    }
    print!("{rendered}");
    Ok(())
}

fn validate(ctx: &mut Ctx) -> Result<()> {
    let pipeline = ctx.pipeline()?;
    println!(
        "lexicon {}: {} entries",
        pipeline.lexicon().version,
        pipeline.lexicon().total_entries()
    );
    let set = pipeline.patterns();
    println!(
        "patterns {}: {} word, {} phrase, {} sentence, {} bug report",
        set.version,
        set.count(Level::Word),
        set.count(Level::Phrase),
        set.count(Level::Sentence),
        set.count(Level::BugReport)
    );
    let ds = match ctx.cfg.data.dataset {
        Some(_) => {
            let ds = ctx.dataset()?;
            println!("dataset: {} reports, {} positive", ds.len(), ds.positives());
            Some(ds)
        }
        None => None,
    };
    if ctx.cfg.data.matches.is_some() {
        let m = ctx.matches(&pipeline, ds.as_ref())?;
        println!("match reports: {}", m.len());
    }
    if let Some(labels) = ctx.sentence_labels()? {
        let ds = ds.as_ref().ok_or(ConfigError::MissingField { field: "data.dataset" })?;
        validate_sentence_labels(&labels, ds, |r| pipeline.processor().process_report(r).len())?;
        println!(
            "sentence labels: {} ({} concurrency related)",
            labels.len(),
            labels.iter().filter(|l| l.is_concurrency_related).count()
        );
    }
    println!("ok");
    Ok(())
}

fn lexicon_validate(ctx: &mut Ctx, path: Option<PathBuf>) -> Result<()> {
    let path = path.or_else(|| ctx.cfg.data.lexicon.clone());
    let (lexicon, warnings) = match &path {
        Some(p) => {
            if !p.is_file() {
                return Err(CliError::usage(format!("lexicon file {} does not exist", p.display())));
            }
            Lexicon::load(p)?
        }
        None => (Lexicon::default_lexicon(), Vec::new()),
    };
    println!("version {}", lexicon.version);
    for c in lexicon.categories() {
        println!("{:<4} {:>4} entries", c.abbr.as_str(), c.entries.len());
    }
    for w in &warnings {
        println!("warning: {w}");
    }
    println!("ok");
    Ok(())
}
