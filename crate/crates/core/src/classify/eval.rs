//! Precision / recall / F1, confusion matrices and repeated-trial intervals.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{Classifier, ClassifyError};
use crate::model::IHLabel;
use crate::stats::{cohens_kappa, t_quantile};

/// Bodies containing this phrase are automated posts and left out of evaluation.
pub const BOT_MARKER: &str = "I am a bot";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldItem {
    pub id: String,
    pub body: String,
    pub gold: IHLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub per_class: BTreeMap<IHLabel, ClassMetrics>,
    pub weighted_f1: f64,
    pub accuracy: f64,
    /// Rows are gold, columns predicted, both in `IHLabel::ALL` order.
    /// For repeated evaluations this is the first trial's matrix.
    pub confusion: [[usize; 3]; 3],
    pub kappa_vs_gold: f64,
    pub trials: usize,
    /// Metric name → 95% interval; empty for a single trial.
    pub ci95: BTreeMap<String, (f64, f64)>,
    /// Weighted F1 of each trial.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trial_weighted_f1: Vec<f64>,
}

fn idx(label: IHLabel) -> usize {
    IHLabel::ALL.iter().position(|&l| l == label).expect("label in ALL")
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Single-trial evaluation. Zero denominators give 0 for that metric.
pub fn evaluate(predictions: &[IHLabel], gold: &[IHLabel]) -> Result<EvaluationReport, ClassifyError> {
    if predictions.len() != gold.len() {
        return Err(ClassifyError::LengthMismatch { predictions: predictions.len(), gold: gold.len() });
    }
    if gold.is_empty() {
        return Err(ClassifyError::EmptyEvaluation);
    }
    let n = gold.len();
    let mut confusion = [[0usize; 3]; 3];
    for (&p, &g) in predictions.iter().zip(gold) {
        confusion[idx(g)][idx(p)] += 1;
    }
    let mut per_class = BTreeMap::new();
    let mut weighted_f1 = 0.0;
    let mut correct = 0;
    for (c, &label) in IHLabel::ALL.iter().enumerate() {
        let tp = confusion[c][c];
        let gold_count: usize = confusion[c].iter().sum();
        let pred_count: usize = (0..3).map(|r| confusion[r][c]).sum();
        let precision = ratio(tp, pred_count);
        let recall = ratio(tp, gold_count);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        weighted_f1 += gold_count as f64 / n as f64 * f1;
        correct += tp;
        per_class.insert(label, ClassMetrics { precision, recall, f1, support: gold_count });
    }
    let kappa = cohens_kappa(predictions, gold).map_err(|e| ClassifyError::Input(e.to_string()))?;
    Ok(EvaluationReport {
        per_class,
        weighted_f1,
        accuracy: correct as f64 / n as f64,
        confusion,
        kappa_vs_gold: kappa.value,
        trials: 1,
        ci95: BTreeMap::new(),
        trial_weighted_f1: vec![weighted_f1],
    })
}

fn metric_vector(r: &EvaluationReport) -> Vec<(String, f64)> {
    let mut out = vec![
        ("weighted_f1".to_string(), r.weighted_f1),
        ("accuracy".to_string(), r.accuracy),
        ("kappa".to_string(), r.kappa_vs_gold),
    ];
    for (label, m) in &r.per_class {
        out.push((format!("precision_{label}"), m.precision));
        out.push((format!("recall_{label}"), m.recall));
        out.push((format!("f1_{label}"), m.f1));
    }
    out
}

/// Runs `trials` classification passes over `gold_set` and reports per-metric
/// means with t-intervals: mean ± t(0.975, trials−1)·sd/√trials.
pub fn repeated_evaluation<C: Classifier + ?Sized>(
    classifier: &C,
    gold_set: &[GoldItem],
    trials: usize,
) -> Result<EvaluationReport, ClassifyError> {
    if trials < 1 {
        return Err(ClassifyError::TooFewTrials(1));
    }
    let texts: Vec<&str> = gold_set.iter().map(|g| g.body.as_str()).collect();
    let gold: Vec<IHLabel> = gold_set.iter().map(|g| g.gold).collect();
    let mut reports = Vec::with_capacity(trials);
    for _ in 0..trials {
        let predictions = classifier.classify_batch(&texts).into_iter().collect::<Result<Vec<_>, _>>()?;
        reports.push(evaluate(&predictions, &gold)?);
    }
    let first = reports[0].clone();
    let series: Vec<Vec<(String, f64)>> = reports.iter().map(metric_vector).collect();
    let k = trials as f64;
    let mut means = BTreeMap::new();
    let mut ci95 = BTreeMap::new();
    let t =
        if trials >= 2 { t_quantile(0.975, k - 1.0).map_err(|e| ClassifyError::Input(e.to_string()))? } else { 0.0 };
    for (m, (name, _)) in series[0].iter().enumerate() {
        let values: Vec<f64> = series.iter().map(|s| s[m].1).collect();
        let constant = values.iter().all(|&v| v == values[0]);
        let mean = if constant { values[0] } else { values.iter().sum::<f64>() / k };
        means.insert(name.clone(), mean);
        if trials >= 2 {
            let var = if constant { 0.0 } else { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0) };
            let half = t * var.sqrt() / k.sqrt();
            ci95.insert(name.clone(), (mean - half, mean + half));
        }
    }
    let per_class = first
        .per_class
        .iter()
        .map(|(label, m)| {
            (
                *label,
                ClassMetrics {
                    precision: means[&format!("precision_{label}")],
                    recall: means[&format!("recall_{label}")],
                    f1: means[&format!("f1_{label}")],
                    support: m.support,
                },
            )
        })
        .collect();
    Ok(EvaluationReport {
        per_class,
        weighted_f1: means["weighted_f1"],
        accuracy: means["accuracy"],
        confusion: first.confusion,
        kappa_vs_gold: means["kappa"],
        trials,
        ci95,
        trial_weighted_f1: reports.iter().map(|r| r.weighted_f1).collect(),
    })
}

/// Drops items whose body contains [`BOT_MARKER`] (case-insensitive).
/// Returns the kept items and the number removed.
pub fn filter_bots(items: Vec<GoldItem>) -> (Vec<GoldItem>, usize) {
    let marker = BOT_MARKER.to_lowercase();
    let before = items.len();
    let kept: Vec<GoldItem> = items.into_iter().filter(|g| !g.body.to_lowercase().contains(&marker)).collect();
    let removed = before - kept.len();
    (kept, removed)
}

#[derive(Deserialize)]
struct GoldRow {
    id: String,
    body: String,
    gold_label: String,
}

/// Reads delimited text with header columns `id, body, gold_label`.
pub fn read_gold_csv<R: Read>(reader: R) -> Result<Vec<GoldItem>, ClassifyError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let mut out = Vec::new();
    for (line, row) in rdr.deserialize::<GoldRow>().enumerate() {
        let row = row?;
        let gold = row.gold_label.parse().map_err(|e| ClassifyError::Input(format!("row {}: {e}", line + 1)))?;
        out.push(GoldItem { id: row.id, body: row.body, gold });
    }
    Ok(out)
}

impl EvaluationReport {
    /// Human-readable table of per-class metrics, confusion matrix and intervals.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let ci = |name: &str| self.ci95.get(name).map(|(lo, hi)| format!(" [{lo:.3}, {hi:.3}]")).unwrap_or_default();
        let _ = writeln!(out, "{:<10} {:>9} {:>9} {:>9} {:>8}", "class", "precision", "recall", "f1", "support");
        for label in IHLabel::ALL {
            let m = &self.per_class[&label];
            let _ = writeln!(
                out,
                "{:<10} {:>9.3} {:>9.3} {:>9.3} {:>8}{}",
                label.as_str(),
                m.precision,
                m.recall,
                m.f1,
                m.support,
                ci(&format!("f1_{label}"))
            );
        }
        let _ = writeln!(out, "weighted F1 {:.3}{}", self.weighted_f1, ci("weighted_f1"));
        let _ = writeln!(out, "accuracy    {:.3}{}", self.accuracy, ci("accuracy"));
        let _ = writeln!(out, "kappa       {:.3}{}", self.kappa_vs_gold, ci("kappa"));
        let _ = writeln!(out, "trials      {}", self.trials);
        let _ = writeln!(out, "\nconfusion (rows gold, columns predicted)");
        let _ = writeln!(out, "{:<10} {:>8} {:>8} {:>8}", "", "IH", "Neutral", "IA");
        for (r, label) in IHLabel::ALL.iter().enumerate() {
            let row = self.confusion[r];
            let _ = writeln!(out, "{:<10} {:>8} {:>8} {:>8}", label.as_str(), row[0], row[1], row[2]);
        }
        out
    }
}
