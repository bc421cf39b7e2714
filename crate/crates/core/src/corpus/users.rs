//! Cross-environment user groups and their paired environment scores.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{CorpusError, EnvClass};
use crate::model::{mean_ih, CommentRecord, IHLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserGroup {
    pub percentile: f64,
    pub users: BTreeSet<String>,
    /// Minimum total comment count admitted by criterion 1.
    pub criterion1_cutoff: usize,
    /// Minimum per-environment comment count admitted by criterion 2.
    pub criterion2_cutoff: usize,
    /// Users with at least one comment in each environment class.
    pub cross_env_users: usize,
}

#[derive(Default, Clone, Copy)]
struct Counts {
    ih: usize,
    ia: usize,
}

fn env_counts<'a>(records: &'a [CommentRecord], envs: &HashMap<String, EnvClass>) -> BTreeMap<&'a str, Counts> {
    let mut counts: BTreeMap<&str, Counts> = BTreeMap::new();
    for r in records {
        let Some(env) = r.subreddit.as_deref().and_then(|s| envs.get(s)) else { continue };
        let c = counts.entry(r.author.as_str()).or_default();
        match env {
            EnvClass::IH => c.ih += 1,
            EnvClass::IA => c.ia += 1,
        }
    }
    counts
}

// Nearest-rank cutoff: the value at rank ⌈p·N⌉ of the descending order.
fn nearest_rank_cutoff(values: &[usize], percentile: f64) -> usize {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let rank = ((percentile * sorted.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

/// Users in the top `percentile` both by total comments (in classified
/// environments) and by min(IH-environment count, IA-environment count).
/// Ties at either cutoff are included.
pub fn select_cross_env_users(
    records: &[CommentRecord],
    envs: &HashMap<String, EnvClass>,
    percentile: f64,
) -> Result<UserGroup, CorpusError> {
    if !(percentile > 0.0 && percentile <= 1.0) {
        return Err(CorpusError::InvalidPercentile(percentile));
    }
    let eligible: Vec<(&str, usize, usize)> = env_counts(records, envs)
        .into_iter()
        .filter(|(_, c)| c.ih > 0 && c.ia > 0)
        .map(|(u, c)| (u, c.ih + c.ia, c.ih.min(c.ia)))
        .collect();
    if eligible.is_empty() {
        tracing::warn!("no cross-environment users");
        return Ok(UserGroup {
            percentile,
            users: BTreeSet::new(),
            criterion1_cutoff: 0,
            criterion2_cutoff: 0,
            cross_env_users: 0,
        });
    }
    let totals: Vec<usize> = eligible.iter().map(|e| e.1).collect();
    let mins: Vec<usize> = eligible.iter().map(|e| e.2).collect();
    let c1 = nearest_rank_cutoff(&totals, percentile);
    let c2 = nearest_rank_cutoff(&mins, percentile);
    let users =
        eligible.iter().filter(|(_, total, min)| *total >= c1 && *min >= c2).map(|(u, _, _)| u.to_string()).collect();
    Ok(UserGroup { percentile, users, criterion1_cutoff: c1, criterion2_cutoff: c2, cross_env_users: eligible.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserPair {
    pub user: String,
    pub ih_env_mean: f64,
    pub ia_env_mean: f64,
    pub n_ih_env: usize,
    pub n_ia_env: usize,
}

/// Mean IH score of each group member's comments in IH and in IA environments.
pub fn paired_env_scores(
    group: &UserGroup,
    records: &[CommentRecord],
    envs: &HashMap<String, EnvClass>,
) -> Result<Vec<UserPair>, CorpusError> {
    let mut labels: BTreeMap<&str, (Vec<IHLabel>, Vec<IHLabel>)> = BTreeMap::new();
    for r in records {
        if !group.users.contains(&r.author) {
            continue;
        }
        let Some(env) = r.subreddit.as_deref().and_then(|s| envs.get(s)) else { continue };
        let label = r.label.ok_or_else(|| CorpusError::Unlabeled(r.id.clone()))?;
        let e = labels.entry(r.author.as_str()).or_default();
        match env {
            EnvClass::IH => e.0.push(label),
            EnvClass::IA => e.1.push(label),
        }
    }
    labels
        .into_iter()
        .map(|(user, (ih, ia))| {
            Ok(UserPair {
                user: user.to_string(),
                ih_env_mean: mean_ih(&ih)?,
                ia_env_mean: mean_ih(&ia)?,
                n_ih_env: ih.len(),
                n_ia_env: ia.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(id: usize, author: &str, sub: &str, label: IHLabel) -> CommentRecord {
        CommentRecord {
            id: id.to_string(),
            author: author.into(),
            thread_id: "t".into(),
            subreddit: Some(sub.into()),
            created_at: id as i64,
            body: "x".into(),
            label: Some(label),
            topic: None,
        }
    }

    fn envs() -> HashMap<String, EnvClass> {
        HashMap::from([("good".to_string(), EnvClass::IH), ("bad".to_string(), EnvClass::IA)])
    }

    // Builds users with the given (IH-env, IA-env) counts.
    fn corpus(spec: &[(&str, usize, usize)]) -> Vec<CommentRecord> {
        let mut v = Vec::new();
        for (u, ih, ia) in spec {
            for _ in 0..*ih {
                v.push(rec(v.len(), u, "good", IHLabel::Neutral));
            }
            for _ in 0..*ia {
                v.push(rec(v.len(), u, "bad", IHLabel::Neutral));
            }
        }
        v
    }

    #[test]
    fn two_criteria_intersection() {
        // totals [10, 8, 6, 4], min-env [5, 1, 2, 2]
        let v = corpus(&[("u1", 5, 5), ("u2", 7, 1), ("u3", 2, 4), ("u4", 2, 2)]);
        let g = select_cross_env_users(&v, &envs(), 0.5).unwrap();
        assert_eq!(g.users, BTreeSet::from(["u1".to_string()]));
        assert_eq!(g.criterion1_cutoff, 8);
        assert_eq!(g.criterion2_cutoff, 2);
    }

    #[test]
    fn full_percentile_keeps_all_cross_env_users() {
        let v = corpus(&[("u1", 5, 5), ("u2", 7, 1), ("solo", 9, 0)]);
        let g = select_cross_env_users(&v, &envs(), 1.0).unwrap();
        assert_eq!(g.users.len(), 2);
        assert_eq!(g.cross_env_users, 2);
    }

    #[test]
    fn ties_at_cutoff_included() {
        let v = corpus(&[("a", 3, 3), ("b", 3, 3), ("c", 3, 3), ("d", 1, 1)]);
        let g = select_cross_env_users(&v, &envs(), 0.25).unwrap();
        assert_eq!(g.users.len(), 3);
    }

    #[test]
    fn empty_group() {
        let v = corpus(&[("solo", 3, 0)]);
        assert!(select_cross_env_users(&v, &envs(), 0.5).unwrap().users.is_empty());
    }

    #[test]
    fn paired_scores() {
        let v = vec![
            rec(0, "u", "good", IHLabel::IH),
            rec(1, "u", "good", IHLabel::Neutral),
            rec(2, "u", "bad", IHLabel::IA),
        ];
        let g = select_cross_env_users(&v, &envs(), 1.0).unwrap();
        let p = paired_env_scores(&g, &v, &envs()).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].ih_env_mean, p[0].ia_env_mean), (0.5, -1.0));
    }

    proptest! {
        #[test]
        fn monotone_in_percentile(
            counts in prop::collection::vec((0usize..8, 0usize..8), 1..25),
            p1 in 0.01f64..=1.0,
            p2 in 0.01f64..=1.0,
        ) {
            let names: Vec<String> = (0..counts.len()).map(|i| format!("u{i}")).collect();
            let spec: Vec<(&str, usize, usize)> =
                names.iter().zip(&counts).map(|(n, (a, b))| (n.as_str(), *a, *b)).collect();
            let v = corpus(&spec);
            let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
            let a = select_cross_env_users(&v, &envs(), lo).unwrap();
            let b = select_cross_env_users(&v, &envs(), hi).unwrap();
            prop_assert!(a.users.is_subset(&b.users));
        }
    }
}
