//! `humility-lab`: observational corpus pipeline, classifier evaluation,
//! trial analysis and the experiment server.

mod corpus;
mod rct;
mod server;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use humility_core::classify::{build_classifier, Backend, Classifier, ClassifierConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "humility-lab", version, about = "Intellectual-humility measurement toolkit")]
struct Cli {
    /// Seed for every random choice made by the command.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Read a comment dump, filter it and write the cleaned JSONL dump.
    Ingest(corpus::IngestArgs),
    /// Keep a per-day fraction of threads with all their comments.
    Sample(corpus::SampleArgs),
    /// Label every comment of a dump.
    Classify(corpus::ClassifyArgs),
    /// Mean IH score and class of every subreddit.
    ScoreEnv(corpus::ScoreEnvArgs),
    /// Select the cross-environment user group at a percentile.
    GroupUsers(corpus::GroupUsersArgs),
    /// Paired t and Wilcoxon tests of IH-environment vs IA-environment means.
    PairedTests(corpus::PairedTestsArgs),
    /// Fit one ordered-logit specification for one user group.
    Fit(corpus::FitArgs),
    /// Full observational analysis: environments, paired tests, all models.
    Report(corpus::ReportArgs),
    /// Evaluate a classifier against a gold CSV (id, body, gold_label).
    Evaluate(corpus::EvaluateArgs),
    /// Write a synthetic unlabeled corpus with a known environment effect; label it with `classify`.
    Synth(corpus::SynthArgs),
    /// Outcomes and regressions for the randomized experiment.
    Rct {
        #[command(subcommand)]
        command: rct::RctCmd,
    },
    /// Run the experiment HTTP service.
    Serve(server::ServeArgs),
    /// Write the analysis export of an experiment event log.
    Export(server::ExportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    LexiconStub,
    RemoteModel,
    RandomBaseline,
    MajorityBaseline,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Backend {
        match b {
            BackendArg::LexiconStub => Backend::LexiconStub,
            BackendArg::RemoteModel => Backend::RemoteModel,
            BackendArg::RandomBaseline => Backend::RandomBaseline,
            BackendArg::MajorityBaseline => Backend::MajorityBaseline,
        }
    }
}

/// Classifier selection shared by every command that labels text.
#[derive(Args, Debug, Clone)]
pub struct ClassifierArgs {
    /// TOML classifier configuration; flags below override it.
    #[arg(long)]
    classifier_config: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model_name: Option<String>,
}

impl ClassifierArgs {
    pub fn config(&self, seed: Option<u64>) -> anyhow::Result<ClassifierConfig> {
        let mut cfg = match &self.classifier_config {
            Some(p) => ClassifierConfig::from_toml(&read_text(p)?)?,
            None => ClassifierConfig::default(),
        };
        if let Some(b) = self.backend {
            cfg.backend = b.into();
        }
        if self.endpoint.is_some() {
            cfg.endpoint = self.endpoint.clone();
        }
        if self.model_name.is_some() {
            cfg.model_name = self.model_name.clone();
        }
        if let Some(s) = seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }

    pub fn build(&self, seed: Option<u64>) -> anyhow::Result<Box<dyn Classifier>> {
        Ok(build_classifier(&self.config(seed)?)?)
    }
}

pub fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Opens `path` for writing, or stdout when absent or `-`.
pub fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        _ => Ok(Box::new(BufWriter::new(std::io::stdout().lock()))),
    }
}

/// Prints `value` as JSON or `text` as-is.
pub fn emit<T: Serialize>(json: bool, value: &T, text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    if json {
        serde_json::to_writer_pretty(&mut out, value)?;
        writeln!(out)?;
    } else {
        write!(out, "{text}")?;
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let seed = cli.seed;
    match cli.command {
        Cmd::Ingest(a) => corpus::ingest(a),
        Cmd::Sample(a) => corpus::sample(a, seed.unwrap_or(0)),
        Cmd::Classify(a) => corpus::classify(a, seed),
        Cmd::ScoreEnv(a) => corpus::score_env(a),
        Cmd::GroupUsers(a) => corpus::group_users(a),
        Cmd::PairedTests(a) => corpus::paired(a),
        Cmd::Fit(a) => corpus::fit(a),
        Cmd::Report(a) => corpus::report(a),
        Cmd::Evaluate(a) => corpus::evaluate(a, seed),
        Cmd::Synth(a) => corpus::synth(a, seed.unwrap_or(0)),
        Cmd::Rct { command } => rct::run(command, seed),
        Cmd::Serve(a) => server::serve(a, seed),
        Cmd::Export(a) => server::export(a),
    }
}
