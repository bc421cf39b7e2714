//! IH / IA / Neutral classifiers and the evaluation harness.

mod agreement;
mod baseline;
mod config;
mod eval;
mod lexicon;
mod remote;

use thiserror::Error;

use crate::model::IHLabel;

pub use agreement::{annotator_agreement, AgreementReport};
pub use baseline::{MajorityBaseline, RandomBaseline};
pub use config::{Backend, ClassifierConfig};
pub use eval::{
    evaluate, filter_bots, read_gold_csv, repeated_evaluation, ClassMetrics, EvaluationReport, GoldItem, BOT_MARKER,
};
pub use lexicon::{lexicon_stub_classify, LexiconConfig, LexiconStub};
pub use remote::{canonicalize_reply, ChatClient, RemoteClassifier, API_KEY_ENV};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("text to classify is empty")]
    EmptyText,
    #[error("model reply `{reply}` is not IH, IA or Neutral (after {attempts} attempts)")]
    InvalidModelReply { reply: String, attempts: u32 },
    #[error("model backend unavailable: {0}")]
    Unavailable(String),
    #[error("invalid classifier configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid label distribution: {0}")]
    InvalidDistribution(String),
    #[error("predictions ({predictions}) and gold ({gold}) differ in length")]
    LengthMismatch { predictions: usize, gold: usize },
    #[error("nothing to evaluate")]
    EmptyEvaluation,
    #[error("at least {0} trial(s) required")]
    TooFewTrials(usize),
    #[error("agreement: {0}")]
    Agreement(String),
    #[error("malformed evaluation input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A text classifier. Implementations are safe to share across threads.
pub trait Classifier: Send + Sync {
    fn classify(&self, text: &str) -> Result<IHLabel, ClassifyError>;

    /// Classifies a batch, preserving input order. The default runs sequentially,
    /// which keeps stateful classifiers (seeded baselines) reproducible.
    fn classify_batch(&self, texts: &[&str]) -> Vec<Result<IHLabel, ClassifyError>> {
        texts.iter().map(|t| self.classify(t)).collect()
    }

    fn name(&self) -> String;
}

impl<C: Classifier + ?Sized> Classifier for Box<C> {
    fn classify(&self, text: &str) -> Result<IHLabel, ClassifyError> {
        (**self).classify(text)
    }

    fn classify_batch(&self, texts: &[&str]) -> Vec<Result<IHLabel, ClassifyError>> {
        (**self).classify_batch(texts)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

/// Builds the classifier described by `config`.
pub fn build_classifier(config: &ClassifierConfig) -> Result<Box<dyn Classifier>, ClassifyError> {
    config.validate()?;
    Ok(match config.backend {
        Backend::RemoteModel => Box::new(RemoteClassifier::from_config(config)?),
        Backend::LexiconStub => Box::new(LexiconStub::new(config.lexicon.clone().unwrap_or_default())),
        Backend::RandomBaseline => Box::new(RandomBaseline::new(config.distribution_or_default(), config.seed)?),
        Backend::MajorityBaseline => Box::new(MajorityBaseline),
    })
}

/// One-shot classification with a freshly built classifier.
pub fn classify(text: &str, config: &ClassifierConfig) -> Result<IHLabel, ClassifyError> {
    build_classifier(config)?.classify(text)
}

pub(crate) fn check_text(text: &str) -> Result<(), ClassifyError> {
    if text.trim().is_empty() {
        Err(ClassifyError::EmptyText)
    } else {
        Ok(())
    }
}
