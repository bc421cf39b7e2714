//! Macro environments (per-subreddit mean IH) and thread microenvironments.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::model::{mean_ih, CommentRecord, IHLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvClass {
    #[serde(rename = "IH_env")]
    IH,
    #[serde(rename = "IA_env")]
    IA,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubredditEnvironment {
    pub name: String,
    pub mean_ih: f64,
    pub classification: EnvClass,
    pub n_comments: usize,
    /// Mean exactly zero; classified IA by rule.
    pub zero_mean: bool,
}

/// Mean IH score per subreddit; IH environment iff the mean is positive.
/// Comments without a subreddit are ignored. Sorted by name.
pub fn score_environments(records: &[CommentRecord]) -> Result<Vec<SubredditEnvironment>, CorpusError> {
    let mut groups: BTreeMap<&str, Vec<IHLabel>> = BTreeMap::new();
    for r in records {
        let Some(sub) = r.subreddit.as_deref() else { continue };
        let label = r.label.ok_or_else(|| CorpusError::Unlabeled(r.id.clone()))?;
        groups.entry(sub).or_default().push(label);
    }
    let mut out = Vec::with_capacity(groups.len());
    for (name, labels) in groups {
        let mean = mean_ih(&labels)?;
        let zero_mean = mean == 0.0;
        if zero_mean {
            tracing::warn!(subreddit = name, "mean IH is exactly zero; classified as IA environment");
        }
        out.push(SubredditEnvironment {
            name: name.to_string(),
            mean_ih: mean,
            classification: if mean > 0.0 { EnvClass::IH } else { EnvClass::IA },
            n_comments: labels.len(),
            zero_mean,
        });
    }
    Ok(out)
}

pub fn environment_map(envs: &[SubredditEnvironment]) -> HashMap<String, EnvClass> {
    envs.iter().map(|e| (e.name.clone(), e.classification)).collect()
}

/// Mean of the `n` preceding scores for each position; `None` while fewer
/// than `n` predecessors exist.
pub fn rolling_env(scores: &[i8], n: usize) -> Vec<Option<f64>> {
    assert!(n >= 1, "window must be at least 1");
    let mut out = Vec::with_capacity(scores.len());
    let mut window_sum: i64 = 0;
    for i in 0..scores.len() {
        if i >= n {
            out.push(Some(window_sum as f64 / n as f64));
            window_sum -= scores[i - n] as i64;
        } else {
            out.push(None);
        }
        window_sum += scores[i] as i64;
    }
    out
}

/// Rolling means keyed by comment id, computed within each thread in
/// (created_at, id) order.
pub fn rolling_by_thread(records: &[CommentRecord], n: usize) -> Result<HashMap<String, Option<f64>>, CorpusError> {
    let mut threads: HashMap<&str, Vec<&CommentRecord>> = HashMap::new();
    for r in records {
        threads.entry(r.thread_id.as_str()).or_default().push(r);
    }
    let mut out = HashMap::with_capacity(records.len());
    for comments in threads.values_mut() {
        comments.sort_by(|a, b| a.thread_order(b));
        let scores = comments
            .iter()
            .map(|c| c.label.map(IHLabel::score).ok_or_else(|| CorpusError::Unlabeled(c.id.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        for (c, v) in comments.iter().zip(rolling_env(&scores, n)) {
            out.insert(c.id.clone(), v);
        }
    }
    Ok(out)
}
