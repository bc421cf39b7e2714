//! OLS models of the experiment outcomes.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CueArm, OutcomeRow, RctError, StanceSide};
use crate::model::IHLabel;
use crate::stats::{ols_fit, stars, DesignBuilder, FitResult, StatsError};

pub const INTERCEPT: &str = "Intercept";
pub const CUE: &str = "Cue";
pub const ENV_IA: &str = "IA";
pub const ENV_IH: &str = "IH";
pub const CUE_X_IA: &str = "Cue x IA";
pub const CUE_X_IH: &str = "Cue x IH";
pub const BASELINE_IH: &str = "Baseline IH";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RctModel {
    Base,
    Interaction,
    BaseCov,
    InteractionCov,
}

impl RctModel {
    pub const ALL: [RctModel; 4] = [RctModel::Base, RctModel::Interaction, RctModel::BaseCov, RctModel::InteractionCov];

    pub fn interaction(self) -> bool {
        matches!(self, RctModel::Interaction | RctModel::InteractionCov)
    }

    pub fn covariates(self) -> bool {
        matches!(self, RctModel::BaseCov | RctModel::InteractionCov)
    }

    pub fn title(self) -> &'static str {
        match self {
            RctModel::Base => "Base",
            RctModel::Interaction => "Interaction",
            RctModel::BaseCov => "Base + Cov",
            RctModel::InteractionCov => "Interaction + Cov",
        }
    }
}

impl fmt::Display for RctModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RctModel::Base => "base",
            RctModel::Interaction => "interaction",
            RctModel::BaseCov => "base-cov",
            RctModel::InteractionCov => "interaction-cov",
        })
    }
}

impl FromStr for RctModel {
    type Err = RctError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "base" => Ok(RctModel::Base),
            "interaction" => Ok(RctModel::Interaction),
            "base-cov" | "base-covariates" => Ok(RctModel::BaseCov),
            "interaction-cov" | "interaction-covariates" => Ok(RctModel::InteractionCov),
            other => Err(RctError::InvalidValue(format!(
                "unknown model `{other}` (expected base, interaction, base-cov or interaction-cov)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Demonstrated,
    SelfReported,
    NComments,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Demonstrated, Outcome::SelfReported, Outcome::NComments];

    pub fn title(self) -> &'static str {
        match self {
            Outcome::Demonstrated => "Demonstrated IH",
            Outcome::SelfReported => "Change in Self-Reported IH",
            Outcome::NComments => "Number of Comments",
        }
    }

    fn value(self, r: &OutcomeRow) -> f64 {
        match self {
            Outcome::Demonstrated => r.demonstrated_ih,
            Outcome::SelfReported => r.self_reported_change,
            Outcome::NComments => r.n_comments as f64,
        }
    }
}

impl FromStr for Outcome {
    type Err = RctError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "demonstrated" | "demonstrated-ih" => Ok(Outcome::Demonstrated),
            "self" | "self-reported" => Ok(Outcome::SelfReported),
            "ncomments" | "n-comments" | "comments" => Ok(Outcome::NComments),
            other => Err(RctError::InvalidValue(format!(
                "unknown outcome `{other}` (expected demonstrated, self or ncomments)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Cue = randomized assignment.
    Itt,
    /// Cue = the participant actually triggered feedback.
    Tot,
}

impl Mode {
    pub fn title(self) -> &'static str {
        match self {
            Mode::Itt => "ITT",
            Mode::Tot => "ToT",
        }
    }
}

impl FromStr for Mode {
    type Err = RctError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "itt" => Ok(Mode::Itt),
            "tot" => Ok(Mode::Tot),
            other => Err(RctError::InvalidValue(format!("unknown mode `{other}` (expected itt or tot)"))),
        }
    }
}

/// Fits one model to the attention-passing rows.
pub fn fit_rct(rows: &[OutcomeRow], model: RctModel, outcome: Outcome, mode: Mode) -> Result<FitResult, RctError> {
    let rows: Vec<&OutcomeRow> = rows.iter().filter(|r| r.attention_pass).collect();
    if rows.is_empty() {
        return Err(RctError::EmptySample);
    }
    let cue = |r: &OutcomeRow| match mode {
        Mode::Itt => r.cue_arm == CueArm::Treated,
        Mode::Tot => r.triggered_feedback,
    };
    if model.interaction() {
        for (env, name) in [(IHLabel::IA, CUE_X_IA), (IHLabel::IH, CUE_X_IH)] {
            if !rows.iter().any(|r| cue(r) && r.env_arm == env) {
                return Err(RctError::EmptyCell(name.to_string()));
            }
        }
    }
    let with_baseline = model.covariates() && outcome != Outcome::SelfReported;
    let (b_mean, b_sd) = if with_baseline {
        let xs: Vec<f64> = rows.iter().map(|r| r.baseline_ih).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0);
        (m, var.sqrt())
    } else {
        (0.0, 1.0)
    };

    let mut b = DesignBuilder::new();
    let c_int = b.add_column(INTERCEPT);
    let c_cue = b.add_column(CUE);
    let c_ia = b.add_column(ENV_IA);
    let c_ih = b.add_column(ENV_IH);
    let inter = model.interaction().then(|| (b.add_column(CUE_X_IA), b.add_column(CUE_X_IH)));
    let groups: Vec<(StanceSide, usize)> = if model.covariates() {
        StanceSide::ALL[1..].iter().map(|&s| (s, b.add_column(s.group_label()))).collect()
    } else {
        Vec::new()
    };
    let c_base = with_baseline.then(|| b.add_column(BASELINE_IH));

    let mut y = Vec::with_capacity(rows.len());
    for r in &rows {
        let c = if cue(r) { 1.0 } else { 0.0 };
        let ia = if r.env_arm == IHLabel::IA { 1.0 } else { 0.0 };
        let ih = if r.env_arm == IHLabel::IH { 1.0 } else { 0.0 };
        let mut e = vec![(c_int, 1.0), (c_cue, c), (c_ia, ia), (c_ih, ih)];
        if let Some((x_ia, x_ih)) = inter {
            e.push((x_ia, c * ia));
            e.push((x_ih, c * ih));
        }
        if let Some(&(_, col)) = groups.iter().find(|(s, _)| *s == r.topic_stance_group) {
            e.push((col, 1.0));
        }
        if let Some(col) = c_base {
            let z = if b_sd > 0.0 { (r.baseline_ih - b_mean) / b_sd } else { 0.0 };
            e.push((col, z));
        }
        b.push_row(e);
        y.push(outcome.value(r));
    }
    ols_fit(&b.build(), &y).map_err(|e| match e {
        StatsError::RankDeficient { columns } => RctError::RankDeficient(columns),
        other => RctError::Stats(other),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RctFit {
    pub model: RctModel,
    pub outcome: Outcome,
    pub mode: Mode,
    pub fit: FitResult,
}

/// Fits every (model, outcome) combination in parallel.
pub fn fit_grid(
    rows: &[OutcomeRow],
    models: &[RctModel],
    outcomes: &[Outcome],
    mode: Mode,
) -> Result<Vec<RctFit>, RctError> {
    let jobs: Vec<(Outcome, RctModel)> = outcomes.iter().flat_map(|&o| models.iter().map(move |&m| (o, m))).collect();
    jobs.par_iter()
        .map(|&(outcome, model)| Ok(RctFit { model, outcome, mode, fit: fit_rct(rows, model, outcome, mode)? }))
        .collect()
}

/// Regression table: one column per fit, coefficient with stars and the
/// standard error in parentheses underneath, then R² and N.
pub fn rct_report(title: &str, fits: &[(String, &FitResult)]) -> String {
    let mut terms: Vec<&str> = Vec::new();
    for (_, f) in fits {
        for t in &f.terms {
            if !terms.contains(&t.term.as_str()) {
                terms.push(&t.term);
            }
        }
    }
    let label_w = terms.iter().map(|t| t.len()).max().unwrap_or(0).max(12);
    let col_w = fits.iter().map(|(h, _)| h.len()).max().unwrap_or(0).max(14);
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    if terms.contains(&BASELINE_IH) {
        let _ = writeln!(out, "{BASELINE_IH} is the within-sample z-score of the pre-survey coded mean.");
    }
    let _ = write!(out, "{:<label_w$}", "");
    for (h, _) in fits {
        let _ = write!(out, " {h:>col_w$}");
    }
    out.push('\n');
    for term in &terms {
        let _ = write!(out, "{term:<label_w$}");
        for (_, f) in fits {
            let cell = f.term(term).map_or(String::new(), |t| format!("{:.4}{:<3}", t.coefficient, stars(t.p_value)));
            let _ = write!(out, " {cell:>col_w$}");
        }
        out.push('\n');
        let _ = write!(out, "{:<label_w$}", "");
        for (_, f) in fits {
            let cell = f.term(term).map_or(String::new(), |t| format!("({:.4})   ", t.std_error));
            let _ = write!(out, " {cell:>col_w$}");
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<label_w$}", "R²");
    for (_, f) in fits {
        let cell = f.r_squared.map_or(String::new(), |r| format!("{r:.4}   "));
        let _ = write!(out, " {cell:>col_w$}");
    }
    out.push('\n');
    let _ = write!(out, "{:<label_w$}", "N");
    for (_, f) in fits {
        let _ = write!(out, " {:>col_w$}", format!("{}   ", f.n_obs));
    }
    out.push('\n');
    let _ = writeln!(out, "***p<0.001; **p<0.01; *p<0.05");
    out
}

/// Tables for every outcome in `fits`, models side by side.
pub fn grid_report(fits: &[RctFit]) -> String {
    let mut out = String::new();
    for outcome in Outcome::ALL {
        let cols: Vec<(String, &FitResult)> =
            fits.iter().filter(|f| f.outcome == outcome).map(|f| (f.model.title().to_string(), &f.fit)).collect();
        if cols.is_empty() {
            continue;
        }
        let mode = fits.iter().find(|f| f.outcome == outcome).map_or("", |f| f.mode.title());
        out.push_str(&rct_report(&format!("{} ({mode})", outcome.title()), &cols));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rct::{simulate_outcomes, RctSimConfig};

    fn rows() -> Vec<OutcomeRow> {
        simulate_outcomes(&RctSimConfig { n_participants: 300, ..RctSimConfig::planted(11) })
    }

    #[test]
    fn base_terms_in_table_order() {
        let f = fit_rct(&rows(), RctModel::Base, Outcome::Demonstrated, Mode::Itt).unwrap();
        let names: Vec<_> = f.terms.iter().map(|t| t.term.as_str()).collect();
        assert_eq!(names, [INTERCEPT, CUE, ENV_IA, ENV_IH]);
    }

    #[test]
    fn covariate_terms_and_baseline_omission() {
        let r = rows();
        let f = fit_rct(&r, RctModel::InteractionCov, Outcome::Demonstrated, Mode::Itt).unwrap();
        assert_eq!(f.terms.len(), 4 + 2 + 5 + 1);
        assert!(f.term("Pro-Choice").is_none());
        assert!(f.term("Pro-Life").is_some());
        assert!(f.term(BASELINE_IH).is_some());
        let s = fit_rct(&r, RctModel::BaseCov, Outcome::SelfReported, Mode::Itt).unwrap();
        assert!(s.term(BASELINE_IH).is_none());
        assert_eq!(s.terms.len(), 4 + 5);
    }

    #[test]
    fn interaction_never_lowers_r2() {
        for seed in 0..10 {
            let r = simulate_outcomes(&RctSimConfig { n_participants: 120, ..RctSimConfig::planted(seed) });
            for outcome in Outcome::ALL {
                let base = fit_rct(&r, RctModel::Base, outcome, Mode::Itt).unwrap().r_squared.unwrap();
                let inter = fit_rct(&r, RctModel::Interaction, outcome, Mode::Itt).unwrap().r_squared.unwrap();
                assert!(inter >= base - 1e-12, "{outcome:?}: {inter} < {base}");
            }
        }
    }

    #[test]
    fn empty_interaction_cell_is_named() {
        let r: Vec<_> =
            rows().into_iter().filter(|r| !(r.cue_arm == CueArm::Treated && r.env_arm == IHLabel::IH)).collect();
        match fit_rct(&r, RctModel::Interaction, Outcome::Demonstrated, Mode::Itt) {
            Err(RctError::EmptyCell(c)) => assert_eq!(c, CUE_X_IH),
            other => panic!("{other:?}"),
        }
        assert!(fit_rct(&r, RctModel::Base, Outcome::Demonstrated, Mode::Itt).is_ok());
    }

    #[test]
    fn attention_filter_applies() {
        let mut r = rows();
        for row in r.iter_mut().take(50) {
            row.attention_pass = false;
        }
        let f = fit_rct(&r, RctModel::Base, Outcome::NComments, Mode::Itt).unwrap();
        assert_eq!(f.n_obs, 250);
    }

    #[test]
    fn tot_equals_itt_when_all_treated_trigger() {
        let r = simulate_outcomes(&RctSimConfig { trigger_rate: 1.0, ..RctSimConfig::planted(4) });
        for model in RctModel::ALL {
            let a = fit_rct(&r, model, Outcome::Demonstrated, Mode::Itt).unwrap();
            let b = fit_rct(&r, model, Outcome::Demonstrated, Mode::Tot).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn parsing() {
        assert_eq!("base-cov".parse::<RctModel>().unwrap(), RctModel::BaseCov);
        assert_eq!("self".parse::<Outcome>().unwrap(), Outcome::SelfReported);
        assert_eq!("TOT".parse::<Mode>().unwrap(), Mode::Tot);
        assert!("full".parse::<RctModel>().is_err());
    }

    #[test]
    fn report_layout() {
        let r = rows();
        let fits = fit_grid(&r, &[RctModel::Base, RctModel::Interaction], &[Outcome::Demonstrated], Mode::Itt).unwrap();
        let text = grid_report(&fits);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "Demonstrated IH (ITT)");
        assert!(lines[1].contains("Base") && lines[1].contains("Interaction"));
        assert!(lines[2].starts_with(INTERCEPT));
        assert!(lines[3].trim_start().starts_with('('));
        assert!(lines[4].starts_with(CUE) && lines[4].contains("***"));
        assert!(text.contains("\nR²") && text.contains("\nN "));
        assert!(text.contains("***p<0.001; **p<0.01; *p<0.05"));
    }
}
