//! Fitted-model results and their tabular report.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Ols,
    OrderedLogit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    pub term: String,
    pub coefficient: f64,
    pub std_error: f64,
    /// t statistic for OLS, z statistic for ordered logit.
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddsRatio {
    pub term: String,
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: ModelKind,
    pub terms: Vec<TermEstimate>,
    /// Ordered-logit thresholds, lowest first. Empty for OLS.
    #[serde(default)]
    pub cutpoints: Vec<TermEstimate>,
    #[serde(default)]
    pub odds_ratios: Option<Vec<OddsRatio>>,
    pub r_squared: Option<f64>,
    pub adj_r_squared: Option<f64>,
    pub pseudo_r_squared: Option<f64>,
    pub log_likelihood: Option<f64>,
    pub n_obs: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Log-likelihood after each accepted Newton step (ordered logit only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loglik_trace: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// Significance stars at 0.05 / 0.01 / 0.001.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

impl FitResult {
    pub fn term(&self, name: &str) -> Option<&TermEstimate> {
        self.terms.iter().find(|t| t.term == name)
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.term(name).map(|t| t.coefficient)
    }

    pub fn odds_ratio(&self, name: &str) -> Option<&OddsRatio> {
        self.odds_ratios.as_ref()?.iter().find(|o| o.term == name)
    }

    /// Plain-text coefficient table: term, coef, se, p (with stars) and,
    /// for logit fits, OR with its 95% CI; fit statistics at the bottom.
    pub fn to_report(&self) -> String {
        let mut out = String::new();
        let logit = self.kind == ModelKind::OrderedLogit;
        let width = self.terms.iter().chain(&self.cutpoints).map(|t| t.term.len()).max().unwrap_or(4).max(12);
        if logit {
            let _ = writeln!(
                out,
                "{:<width$} {:>10} {:>9} {:>10}  {:<3} {:>9} {:>9} {:>9}",
                "term", "coef", "se", "p", "", "OR", "CI low", "CI up"
            );
        } else {
            let _ = writeln!(out, "{:<width$} {:>10} {:>9} {:>10}  {:<3}", "term", "coef", "se", "p", "");
        }
        for t in &self.terms {
            let _ = write!(
                out,
                "{:<width$} {:>10.4} {:>9.4} {:>10.4}  {:<3}",
                t.term,
                t.coefficient,
                t.std_error,
                t.p_value,
                stars(t.p_value)
            );
            if let Some(or) = self.odds_ratio(&t.term) {
                let _ = write!(out, " {:>9.4} {:>9.4} {:>9.4}", or.ratio, or.ci_low, or.ci_high);
            }
            out.push('\n');
        }
        for t in &self.cutpoints {
            let _ =
                writeln!(out, "{:<width$} {:>10.4} {:>9.4} {:>10}  {:<3}", t.term, t.coefficient, t.std_error, "", "");
        }
        let _ = writeln!(out, "{}", "-".repeat(width + 36));
        if let Some(r2) = self.r_squared {
            let _ = writeln!(out, "R^2        {r2:.4}");
        }
        if let Some(r2) = self.adj_r_squared {
            let _ = writeln!(out, "Adj. R^2   {r2:.4}");
        }
        if let Some(r2) = self.pseudo_r_squared {
            let _ = writeln!(out, "Pseudo R^2 {r2:.4}");
        }
        if let Some(ll) = self.log_likelihood {
            let _ = writeln!(out, "Log-lik.   {ll:.4}");
        }
        let _ = writeln!(out, "Num. obs.  {}", self.n_obs);
        if !self.converged {
            let _ = writeln!(
                out,
                "WARNING: not converged{}",
                self.message.as_deref().map(|m| format!(" ({m})")).unwrap_or_default()
            );
        }
        let _ = writeln!(out, "***p<0.001; **p<0.01; *p<0.05");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_thresholds() {
        assert_eq!(stars(0.0005), "***");
        assert_eq!(stars(0.001), "**");
        assert_eq!(stars(0.02), "*");
        assert_eq!(stars(0.05), "");
    }
}
