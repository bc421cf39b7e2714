//! End-to-end observational analysis over a labeled corpus.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    environment_map, fit_all_groups, model_table_report, paired_env_scores, score_environments, select_cross_env_users,
    CorpusError, ModelOutcome, ModelSpec, SubredditEnvironment, UserGroup,
};
use crate::model::CommentRecord;
use crate::stats::{paired_tests, PairedTestResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub percentiles: Vec<f64>,
    pub specs: Vec<ModelSpec>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { percentiles: vec![0.10, 0.25, 0.50, 1.0], specs: ModelSpec::ALL.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub group: UserGroup,
    pub n_comments: usize,
    /// IH-environment mean minus IA-environment mean, per user; `None` with
    /// fewer than two users.
    pub paired: Option<PairedTestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationalAnalysis {
    pub environments: Vec<SubredditEnvironment>,
    pub groups: Vec<GroupSummary>,
    pub models: Vec<ModelOutcome>,
}

pub fn group_label(percentile: f64) -> String {
    format!("Top {}%", (percentile * 100.0).round())
}

/// Scores environments, selects each percentile group, runs the paired tests
/// and fits every model specification for every group.
pub fn analyze(records: &[CommentRecord], cfg: &AnalysisConfig) -> Result<ObservationalAnalysis, CorpusError> {
    let environments = score_environments(records)?;
    let envs = environment_map(&environments);
    let mut groups = Vec::new();
    for &p in &cfg.percentiles {
        let group = select_cross_env_users(records, &envs, p)?;
        let pairs = paired_env_scores(&group, records, &envs)?;
        let n_comments = pairs.iter().map(|u| u.n_ih_env + u.n_ia_env).sum();
        let paired = if pairs.len() >= 2 {
            let ih: Vec<f64> = pairs.iter().map(|u| u.ih_env_mean).collect();
            let ia: Vec<f64> = pairs.iter().map(|u| u.ia_env_mean).collect();
            Some(paired_tests(&ih, &ia)?)
        } else {
            tracing::warn!(percentile = p, "fewer than two users; paired tests skipped");
            None
        };
        groups.push(GroupSummary { label: group_label(p), group, n_comments, paired });
    }
    let labeled: Vec<(String, UserGroup)> = groups.iter().map(|g| (g.label.clone(), g.group.clone())).collect();
    let models = fit_all_groups(records, &envs, &labeled, &cfg.specs)?;
    Ok(ObservationalAnalysis { environments, groups, models })
}

impl ObservationalAnalysis {
    /// Environment table, paired-test table and the model table.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<20} {:>9} {:>8} {:>6}", "Subreddit", "Mean IH", "Class", "N");
        for e in &self.environments {
            let class = match e.classification {
                super::EnvClass::IH => "IH",
                super::EnvClass::IA => "IA",
            };
            let flag = if e.zero_mean { "  (zero mean)" } else { "" };
            let _ = writeln!(out, "{:<20} {:>9.3} {:>8} {:>6}{flag}", e.name, e.mean_ih, class, e.n_comments);
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<12} {:>6} {:>9} {:>10} {:>8} {:<3} {:>12} {:<3} {:>9}",
            "User Group", "Users", "Comments", "Mean Diff", "t", "", "W", "", "Cohen's d"
        );
        for g in &self.groups {
            match &g.paired {
                Some(p) => {
                    let _ = writeln!(
                        out,
                        "{:<12} {:>6} {:>9} {:>10.4} {:>8.2} {:<3} {:>12.1} {:<3} {:>9.3}",
                        g.label,
                        g.group.users.len(),
                        g.n_comments,
                        p.mean_diff,
                        p.t_stat,
                        crate::stats::stars(p.p_value_t),
                        p.wilcoxon_stat,
                        crate::stats::stars(p.p_value_w),
                        p.cohens_d
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "{:<12} {:>6} {:>9}   (too few users)",
                        g.label,
                        g.group.users.len(),
                        g.n_comments
                    );
                }
            }
        }
        let _ = writeln!(out);
        out.push_str(&model_table_report(&self.models));
        out
    }
}
