//! Cleaning: deleted / moderated bodies, very short replies, non-English text.

use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::model::{BodyStatus, CommentRecord};

const STOPWORDS: &str = include_str!("../../assets/stopwords_en.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LanguageFilter {
    None,
    Heuristic,
    /// Caller supplies a detector through [`preprocess_with`].
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusFilterConfig {
    pub min_tokens: usize,
    pub drop_deleted: bool,
    pub drop_moderated: bool,
    pub language_filter: LanguageFilter,
}

impl Default for CorpusFilterConfig {
    fn default() -> Self {
        CorpusFilterConfig {
            min_tokens: 3,
            drop_deleted: true,
            drop_moderated: true,
            language_filter: LanguageFilter::Heuristic,
        }
    }
}

/// Drop reasons, checked in declaration order; the first match wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Deleted,
    Moderated,
    TooShort,
    NonEnglish,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropReport {
    pub input: usize,
    pub kept: usize,
    pub dropped: BTreeMap<DropReason, usize>,
}

impl DropReport {
    pub fn total_dropped(&self) -> usize {
        self.dropped.values().sum()
    }
}

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS.lines().map(str::trim).filter(|w| !w.is_empty()).collect())
}

/// English if at least 60% of tokens are common English function words, or
/// at least 95% of alphabetic characters are ASCII letters.
pub fn is_english_heuristic(text: &str) -> bool {
    let tokens: Vec<String> = text
        .split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'').replace('\u{2019}', "'").to_lowercase())
        .filter(|t| !t.is_empty())
        .collect();
    if tokens.is_empty() {
        return false;
    }
    let hits = tokens.iter().filter(|t| stopwords().contains(t.as_str())).count();
    if hits as f64 >= 0.6 * tokens.len() as f64 {
        return true;
    }
    let letters: Vec<char> = text.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.is_empty() {
        return false;
    }
    let ascii = letters.iter().filter(|c| c.is_ascii_alphabetic()).count();
    ascii as f64 >= 0.95 * letters.len() as f64
}

pub fn preprocess(
    records: Vec<CommentRecord>,
    config: &CorpusFilterConfig,
) -> Result<(Vec<CommentRecord>, DropReport), CorpusError> {
    preprocess_with(records, config, None)
}

/// As [`preprocess`], with an optional external language detector that
/// returns true for English text. Required when the filter is `External`.
pub fn preprocess_with(
    records: Vec<CommentRecord>,
    config: &CorpusFilterConfig,
    detector: Option<&(dyn Fn(&str) -> bool + Sync)>,
) -> Result<(Vec<CommentRecord>, DropReport), CorpusError> {
    if config.min_tokens < 1 {
        return Err(CorpusError::InvalidConfig("min_tokens must be at least 1".into()));
    }
    if config.language_filter == LanguageFilter::External && detector.is_none() {
        return Err(CorpusError::InvalidConfig("external language filter needs a detector".into()));
    }
    let mut report = DropReport { input: records.len(), ..Default::default() };
    let mut kept = Vec::with_capacity(records.len());
    for r in records {
        match drop_reason(&r, config, detector) {
            Some(reason) => *report.dropped.entry(reason).or_default() += 1,
            None => kept.push(r),
        }
    }
    report.kept = kept.len();
    Ok((kept, report))
}

fn drop_reason(
    r: &CommentRecord,
    config: &CorpusFilterConfig,
    detector: Option<&(dyn Fn(&str) -> bool + Sync)>,
) -> Option<DropReason> {
    let status = r.body_status();
    if config.drop_deleted && status == BodyStatus::Deleted {
        return Some(DropReason::Deleted);
    }
    if config.drop_moderated && status == BodyStatus::Removed {
        return Some(DropReason::Moderated);
    }
    if r.body.split_whitespace().count() < config.min_tokens {
        return Some(DropReason::TooShort);
    }
    let english = match config.language_filter {
        LanguageFilter::None => true,
        LanguageFilter::Heuristic => is_english_heuristic(&r.body),
        LanguageFilter::External => detector.is_some_and(|d| d(&r.body)),
    };
    (!english).then_some(DropReason::NonEnglish)
}
