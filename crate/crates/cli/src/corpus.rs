//! Observational-pipeline verbs. Every stage reads and writes the JSONL dump
//! schema, so stages compose through files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Write as _};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use humility_core::classify::{filter_bots, read_gold_csv, repeated_evaluation};
use humility_core::corpus::{
    analyze, block_sample, build_dataset, environment_map, group_label, ingest as ingest_file, paired_env_scores,
    preprocess, run_models, score_environments, select_cross_env_users, synthetic_corpus, write_dump, AnalysisConfig,
    CorpusFilterConfig, EnvClass, InputFormat, LanguageFilter, ModelSpec, SubredditEnvironment, SyntheticCorpusConfig,
    TopicBucketer,
};
use humility_core::stats::{paired_tests, stars, PairedTestResult};
use humility_core::CommentRecord;
use serde::Serialize;

use crate::{emit, output, ClassifierArgs};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LanguageArg {
    None,
    Heuristic,
}

#[derive(Args)]
pub struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: FormatArg,
    /// Output dump; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    min_tokens: usize,
    #[arg(long)]
    keep_deleted: bool,
    #[arg(long)]
    keep_moderated: bool,
    #[arg(long, value_enum, default_value = "heuristic")]
    language: LanguageArg,
    /// Leave records without a topic column untouched instead of keyword-bucketing them.
    #[arg(long)]
    no_topics: bool,
}

#[derive(Args)]
pub struct SampleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.25)]
    fraction: f64,
}

#[derive(Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    classifier: ClassifierArgs,
}

#[derive(Args)]
pub struct ScoreEnvArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
pub struct GroupUsersArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    percentile: f64,
    /// Print the member list too.
    #[arg(long)]
    list: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
pub struct PairedTestsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "percentile", default_values_t = [0.1, 0.25, 0.5, 1.0])]
    percentiles: Vec<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
pub struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    /// M1 through M5.
    #[arg(long, value_parser = parse_spec)]
    model: ModelSpec,
    #[arg(long, default_value_t = 1.0)]
    percentile: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "percentile", default_values_t = [0.1, 0.25, 0.5, 1.0])]
    percentiles: Vec<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// CSV with columns id, body, gold_label.
    #[arg(long)]
    gold: PathBuf,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Keep automated posts in the evaluation set.
    #[arg(long)]
    keep_bots: bool,
    #[command(flatten)]
    classifier: ClassifierArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Labels independent of the environment.
    #[arg(long)]
    null: bool,
    #[arg(long)]
    users: Option<usize>,
}

fn parse_spec(s: &str) -> Result<ModelSpec, String> {
    s.parse().map_err(|e: humility_core::corpus::CorpusError| e.to_string())
}

fn load(path: &Path) -> anyhow::Result<Vec<CommentRecord>> {
    let (records, report) = ingest_file(path, InputFormat::JsonlDump)?;
    if !report.skipped.is_empty() {
        eprintln!("{}: skipped {} malformed lines", path.display(), report.skipped.len());
    }
    Ok(records)
}

fn save(records: &[CommentRecord], out: Option<&Path>) -> anyhow::Result<()> {
    let mut w = output(out)?;
    write_dump(records, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn ingest(a: IngestArgs) -> anyhow::Result<()> {
    let format = match a.format {
        FormatArg::Jsonl => InputFormat::JsonlDump,
        FormatArg::Csv => InputFormat::Csv,
    };
    let (records, report) = ingest_file(&a.input, format)?;
    for (line, reason) in &report.skipped {
        eprintln!("skipped line {line}: {reason}");
    }
    let cfg = CorpusFilterConfig {
        min_tokens: a.min_tokens,
        drop_deleted: !a.keep_deleted,
        drop_moderated: !a.keep_moderated,
        language_filter: match a.language {
            LanguageArg::None => LanguageFilter::None,
            LanguageArg::Heuristic => LanguageFilter::Heuristic,
        },
    };
    let (mut kept, drops) = preprocess(records, &cfg)?;
    if !a.no_topics {
        TopicBucketer::default().fill(&mut kept);
    }
    eprintln!("read {} records ({} lines, {} skipped)", report.records, report.lines, report.skipped.len());
    eprintln!("kept {} of {}", drops.kept, drops.input);
    for (reason, n) in &drops.dropped {
        eprintln!("  dropped {n}: {reason:?}");
    }
    save(&kept, a.out.as_deref())
}

pub fn sample(a: SampleArgs, seed: u64) -> anyhow::Result<()> {
    let records = load(&a.input)?;
    let (kept, report) = block_sample(records, a.fraction, seed)?;
    eprintln!(
        "{} days, {} of {} threads, {} comments",
        report.days, report.threads_selected, report.threads_total, report.comments_selected
    );
    save(&kept, a.out.as_deref())
}

pub fn classify(a: ClassifyArgs, seed: Option<u64>) -> anyhow::Result<()> {
    let mut records = load(&a.input)?;
    let classifier = a.classifier.build(seed)?;
    let texts: Vec<&str> = records.iter().map(|r| r.body.as_str()).collect();
    let labels = classifier.classify_batch(&texts);
    for (r, l) in records.iter_mut().zip(labels) {
        r.label = Some(l.with_context(|| format!("classifying comment {}", r.id))?);
    }
    eprintln!("labeled {} comments with {}", records.len(), classifier.name());
    save(&records, a.out.as_deref())
}

fn env_table(envs: &[SubredditEnvironment]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<20} {:>9} {:>6} {:>7}", "Subreddit", "Mean IH", "Class", "N");
    for e in envs {
        let class = match e.classification {
            EnvClass::IH => "IH",
            EnvClass::IA => "IA",
        };
        let flag = if e.zero_mean { "  (zero mean)" } else { "" };
        let _ = writeln!(out, "{:<20} {:>9.3} {:>6} {:>7}{flag}", e.name, e.mean_ih, class, e.n_comments);
    }
    out
}

pub fn score_env(a: ScoreEnvArgs) -> anyhow::Result<()> {
    let envs = score_environments(&load(&a.input)?)?;
    emit(a.json, &envs, &env_table(&envs))
}

pub fn group_users(a: GroupUsersArgs) -> anyhow::Result<()> {
    let records = load(&a.input)?;
    let envs = environment_map(&score_environments(&records)?);
    let group = select_cross_env_users(&records, &envs, a.percentile)?;
    let mut text = format!(
        "{}: {} of {} cross-environment users (total comments >= {}, min per environment >= {})\n",
        group_label(a.percentile),
        group.users.len(),
        group.cross_env_users,
        group.criterion1_cutoff,
        group.criterion2_cutoff
    );
    if a.list {
        for u in &group.users {
            let _ = writeln!(text, "{u}");
        }
    }
    emit(a.json, &group, &text)
}

#[derive(Serialize)]
struct PairedRow {
    group: String,
    users: usize,
    result: Option<PairedTestResult>,
}

pub fn paired(a: PairedTestsArgs) -> anyhow::Result<()> {
    let records = load(&a.input)?;
    let envs: HashMap<String, EnvClass> = environment_map(&score_environments(&records)?);
    let mut rows = Vec::new();
    for &p in &a.percentiles {
        let group = select_cross_env_users(&records, &envs, p)?;
        let pairs = paired_env_scores(&group, &records, &envs)?;
        let result = if pairs.len() >= 2 {
            let ih: Vec<f64> = pairs.iter().map(|u| u.ih_env_mean).collect();
            let ia: Vec<f64> = pairs.iter().map(|u| u.ia_env_mean).collect();
            Some(paired_tests(&ih, &ia)?)
        } else {
            None
        };
        rows.push(PairedRow { group: group_label(p), users: pairs.len(), result });
    }
    let mut text = format!(
        "{:<12} {:>6} {:>10} {:>8} {:>10} {:<3} {:>10} {:>10} {:<3} {:>9}\n",
        "User Group", "Users", "Mean Diff", "t", "p", "", "W", "p", "", "Cohen's d"
    );
    for r in &rows {
        match &r.result {
            Some(t) => {
                let _ = writeln!(
                    text,
                    "{:<12} {:>6} {:>10.4} {:>8.3} {:>10.3e} {:<3} {:>10.1} {:>10.3e} {:<3} {:>9.3}",
                    r.group,
                    r.users,
                    t.mean_diff,
                    t.t_stat,
                    t.p_value_t,
                    stars(t.p_value_t),
                    t.wilcoxon_stat,
                    t.p_value_w,
                    stars(t.p_value_w),
                    t.cohens_d
                );
            }
            None => {
                let _ = writeln!(text, "{:<12} {:>6}   (too few users)", r.group, r.users);
            }
        }
    }
    emit(a.json, &rows, &text)
}

pub fn fit(a: FitArgs) -> anyhow::Result<()> {
    let records = load(&a.input)?;
    let envs = environment_map(&score_environments(&records)?);
    let group = select_cross_env_users(&records, &envs, a.percentile)?;
    let dataset = build_dataset(&records, &envs, &group)?;
    let result = run_models(&dataset, a.model)?;
    let text = format!("{} / {}\n{}", group_label(a.percentile), a.model, result.to_report());
    emit(a.json, &result, &text)
}

pub fn report(a: ReportArgs) -> anyhow::Result<()> {
    let records = load(&a.input)?;
    let cfg = AnalysisConfig { percentiles: a.percentiles, ..Default::default() };
    let analysis = analyze(&records, &cfg)?;
    emit(a.json, &analysis, &analysis.report())
}

pub fn evaluate(a: EvaluateArgs, seed: Option<u64>) -> anyhow::Result<()> {
    let file = File::open(&a.gold).with_context(|| format!("opening {}", a.gold.display()))?;
    let mut items = read_gold_csv(BufReader::new(file))?;
    if !a.keep_bots {
        let (kept, removed) = filter_bots(items);
        if removed > 0 {
            eprintln!("left out {removed} automated posts");
        }
        items = kept;
    }
    let classifier = a.classifier.build(seed)?;
    let report = repeated_evaluation(classifier.as_ref(), &items, a.trials)?;
    let text = format!("{} on {} items\n{}", classifier.name(), items.len(), report.to_table());
    emit(a.json, &report, &text)
}

pub fn synth(a: SynthArgs, seed: u64) -> anyhow::Result<()> {
    let mut cfg = if a.null { SyntheticCorpusConfig::null(seed) } else { SyntheticCorpusConfig::planted(seed) };
    if let Some(n) = a.users {
        cfg.n_users = n;
    }
    let mut records = synthetic_corpus(&cfg);
    TopicBucketer::default().fill(&mut records);
    eprintln!("generated {} comments", records.len());
    save(&records, a.out.as_deref())
}
