//! Ordered-logit Models 1–5 over the comments of a user group.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rolling_by_thread, CorpusError, EnvClass, UserGroup};
use crate::model::CommentRecord;
use crate::stats::{bonferroni, ordered_logit_fit, stars, DesignBuilder, FitResult};

pub const ENV_TERM: &str = "Env";
const NO_TOPIC: &str = "(none)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelSpec {
    M1,
    M2,
    M3,
    M4,
    M5,
}

impl ModelSpec {
    pub const ALL: [ModelSpec; 5] = [ModelSpec::M1, ModelSpec::M2, ModelSpec::M3, ModelSpec::M4, ModelSpec::M5];

    fn author_fe(self) -> bool {
        self >= ModelSpec::M2
    }

    fn topic_fe(self) -> bool {
        self >= ModelSpec::M3
    }

    pub fn rolling_window(self) -> Option<usize> {
        match self {
            ModelSpec::M4 => Some(3),
            ModelSpec::M5 => Some(5),
            _ => None,
        }
    }

    pub fn rolling_term(self) -> Option<String> {
        self.rolling_window().map(|n| format!("RollingMean{n}"))
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = *self as usize + 1;
        write!(f, "Model {n}")
    }
}

impl FromStr for ModelSpec {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "M1" | "1" => Ok(ModelSpec::M1),
            "M2" | "2" => Ok(ModelSpec::M2),
            "M3" | "3" => Ok(ModelSpec::M3),
            "M4" | "4" => Ok(ModelSpec::M4),
            "M5" | "5" => Ok(ModelSpec::M5),
            other => Err(CorpusError::InvalidConfig(format!("unknown model `{other}` (expected M1..M5)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub id: String,
    pub author: String,
    pub topic: String,
    pub env_ih: bool,
    /// IA = 0, Neutral = 1, IH = 2.
    pub y: usize,
    pub rolling3: Option<f64>,
    pub rolling5: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelDataset {
    pub rows: Vec<ModelRow>,
}

/// One row per comment by a group member in a classified environment.
/// Rolling means use every labeled comment of the thread, members or not.
pub fn build_dataset(
    records: &[CommentRecord],
    envs: &HashMap<String, EnvClass>,
    group: &UserGroup,
) -> Result<ModelDataset, CorpusError> {
    let r3 = rolling_by_thread(records, 3)?;
    let r5 = rolling_by_thread(records, 5)?;
    let mut rows = Vec::new();
    for r in records {
        if !group.users.contains(&r.author) {
            continue;
        }
        let Some(env) = r.subreddit.as_deref().and_then(|s| envs.get(s)) else { continue };
        let label = r.label.ok_or_else(|| CorpusError::Unlabeled(r.id.clone()))?;
        rows.push(ModelRow {
            id: r.id.clone(),
            author: r.author.clone(),
            topic: r.topic.clone().unwrap_or_else(|| NO_TOPIC.to_string()),
            env_ih: *env == EnvClass::IH,
            y: label.ordinal(),
            rolling3: r3[&r.id],
            rolling5: r5[&r.id],
        });
    }
    Ok(ModelDataset { rows })
}

/// Fits one specification. Rows lacking the rolling mean a model needs are dropped.
pub fn run_models(dataset: &ModelDataset, spec: ModelSpec) -> Result<FitResult, CorpusError> {
    let rolling = |row: &ModelRow| match spec.rolling_window() {
        Some(3) => row.rolling3,
        Some(_) => row.rolling5,
        None => Some(0.0),
    };
    let rows: Vec<(&ModelRow, f64)> = dataset.rows.iter().filter_map(|r| rolling(r).map(|v| (r, v))).collect();

    let mut b = DesignBuilder::new();
    let env = b.add_column(ENV_TERM);
    let authors =
        if spec.author_fe() { b.add_factor("Author", rows.iter().map(|(r, _)| r.author.as_str())) } else { None };
    let topics = if spec.topic_fe() { b.add_factor("Topic", rows.iter().map(|(r, _)| r.topic.as_str())) } else { None };
    let roll = spec.rolling_term().map(|t| b.add_column(&t));
    let mut y = Vec::with_capacity(rows.len());
    for (r, v) in &rows {
        let mut entries = vec![(env, if r.env_ih { 1.0 } else { 0.0 })];
        if let Some(c) = authors.as_ref().and_then(|f| f.column(&r.author)) {
            entries.push((c, 1.0));
        }
        if let Some(c) = topics.as_ref().and_then(|f| f.column(&r.topic)) {
            entries.push((c, 1.0));
        }
        if let Some(c) = roll {
            entries.push((c, *v));
        }
        b.push_row(entries);
        y.push(r.y);
    }
    Ok(ordered_logit_fit(&b.build(), &y, 3)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub group: String,
    pub spec: ModelSpec,
    pub fit: FitResult,
    /// Env p-value adjusted over every fit in the family.
    pub env_p_bonferroni: f64,
}

/// Fits `specs` for every group in parallel and Bonferroni-adjusts the Env
/// p-values over the whole family (groups × specs).
pub fn fit_all_groups(
    records: &[CommentRecord],
    envs: &HashMap<String, EnvClass>,
    groups: &[(String, UserGroup)],
    specs: &[ModelSpec],
) -> Result<Vec<ModelOutcome>, CorpusError> {
    let datasets = groups.iter().map(|(_, g)| build_dataset(records, envs, g)).collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, ModelSpec)> = (0..groups.len()).flat_map(|g| specs.iter().map(move |&s| (g, s))).collect();
    let fits = jobs.par_iter().map(|&(g, s)| run_models(&datasets[g], s)).collect::<Result<Vec<_>, _>>()?;
    let env_p: Vec<f64> = fits.iter().map(|f| f.term(ENV_TERM).map_or(f64::NAN, |t| t.p_value)).collect();
    let adjusted = bonferroni(&env_p, env_p.len().max(1))?;
    Ok(jobs
        .into_iter()
        .zip(fits)
        .zip(adjusted)
        .map(|(((g, spec), fit), env_p_bonferroni)| ModelOutcome {
            group: groups[g].0.clone(),
            spec,
            fit,
            env_p_bonferroni,
        })
        .collect())
}

/// Wide table: group, model, N, Env coefficient / stars / OR / adjusted p /
/// CI, rolling-mean coefficient / stars / OR / CI, pseudo R².
pub fn model_table_report(outcomes: &[ModelOutcome]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:<8} {:>7} {:>9} {:<3} {:>8} {:>10} {:>8} {:>8} {:>9} {:<3} {:>8} {:>8} {:>8} {:>9}",
        "User Group",
        "Model",
        "N",
        "Coef Env",
        "p",
        "OR Env",
        "p Bonf.",
        "CI Low",
        "CI Up",
        "Coef Roll",
        "p",
        "OR Roll",
        "CI Low",
        "CI Up",
        "Pseudo R2"
    );
    let dash = "--";
    for o in outcomes {
        let f = &o.fit;
        let env = f.term(ENV_TERM);
        let env_or = f.odds_ratio(ENV_TERM);
        let roll_name = o.spec.rolling_term();
        let roll = roll_name.as_deref().and_then(|n| f.term(n));
        let roll_or = roll_name.as_deref().and_then(|n| f.odds_ratio(n));
        let num = |v: Option<f64>| v.map_or(dash.to_string(), |x| format!("{x:.4}"));
        let _ = writeln!(
            out,
            "{:<12} {:<8} {:>7} {:>9} {:<3} {:>8} {:>10} {:>8} {:>8} {:>9} {:<3} {:>8} {:>8} {:>8} {:>9}{}",
            o.group,
            o.spec.to_string(),
            f.n_obs,
            num(env.map(|t| t.coefficient)),
            env.map_or("", |t| stars(t.p_value)),
            num(env_or.map(|r| r.ratio)),
            format!("{:.4}{}", o.env_p_bonferroni, stars(o.env_p_bonferroni)),
            num(env_or.map(|r| r.ci_low)),
            num(env_or.map(|r| r.ci_high)),
            num(roll.map(|t| t.coefficient)),
            roll.map_or(dash, |t| stars(t.p_value)),
            num(roll_or.map(|r| r.ratio)),
            num(roll_or.map(|r| r.ci_low)),
            num(roll_or.map(|r| r.ci_high)),
            num(f.pseudo_r_squared),
            if f.converged { "" } else { "  (not converged)" }
        );
    }
    let _ = writeln!(out, "***p<0.001; **p<0.01; *p<0.05. Bonferroni over {} tests.", outcomes.len());
    out
}
