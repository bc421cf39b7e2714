//! Observational pipeline over comment dumps: ingest, clean, sample, score
//! environments, group cross-environment users and fit the ordered-logit models.

mod analysis;
mod environment;
mod ingest;
mod models;
mod preprocess;
mod sample;
mod synth;
mod topics;
mod users;

use thiserror::Error;

use crate::model::ModelError;
use crate::stats::StatsError;

pub use analysis::{analyze, group_label, AnalysisConfig, GroupSummary, ObservationalAnalysis};
pub use environment::{
    environment_map, rolling_by_thread, rolling_env, score_environments, EnvClass, SubredditEnvironment,
};
pub use ingest::{ingest, ingest_reader, write_dump, IngestReport, InputFormat, MAX_MALFORMED_FRACTION};
pub use models::{
    build_dataset, fit_all_groups, model_table_report, run_models, ModelDataset, ModelOutcome, ModelRow, ModelSpec,
    ENV_TERM,
};
pub use preprocess::{
    is_english_heuristic, preprocess, preprocess_with, CorpusFilterConfig, DropReason, DropReport, LanguageFilter,
};
pub use sample::{block_sample, SampleReport};
pub use synth::{synthetic_corpus, SyntheticCorpusConfig};
pub use topics::TopicBucketer;
pub use users::{paired_env_scores, select_cross_env_users, UserGroup, UserPair};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{malformed} of {lines} lines malformed (limit {limit_pct}%); first: line {first_line}: {first_reason}")]
    CorpusQuality { malformed: usize, lines: usize, limit_pct: f64, first_line: usize, first_reason: String },
    #[error("comment `{0}` has no label")]
    Unlabeled(String),
    #[error("sampling fraction must be in (0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("percentile must be in (0, 1], got {0}")]
    InvalidPercentile(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
