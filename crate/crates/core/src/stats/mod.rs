//! Self-contained numerical statistics used by the corpus and trial analyses.

pub mod design;
pub mod dist;
pub mod fit;
pub mod kappa;
pub mod multiple;
pub mod ols;
pub mod ordered_logit;
pub mod paired;

use thiserror::Error;

pub use design::{Design, DesignBuilder, Factor};
pub use dist::{normal_cdf, t_cdf, t_quantile};
pub use fit::{stars, FitResult, ModelKind, OddsRatio, TermEstimate};
pub use kappa::{cohens_kappa, Kappa};
pub use multiple::bonferroni;
pub use ols::ols_fit;
pub use ordered_logit::{category_probabilities, ordered_logit_fit, ordered_logit_fit_with, OrderedLogitOptions};
pub use paired::{cohens_d_paired, paired_t_test, paired_tests, wilcoxon_signed_rank, PairedTestResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("degrees of freedom must be finite and >= 1, got {0}")]
    InvalidDf(f64),
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("differences have zero variance with nonzero mean")]
    DegenerateVariance,
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("design is rank deficient; dependent columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("outcome category {0} has no observations")]
    EmptyCategory(usize),
    #[error("number of tests must be >= 1 and >= the number of p-values")]
    InvalidTestCount,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub(crate) fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}
