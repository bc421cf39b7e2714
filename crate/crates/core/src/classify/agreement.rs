//! Inter-annotator agreement on sub-labels.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::ClassifyError;
use crate::model::{Annotation, Codebook};
use crate::stats::cohens_kappa;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    /// Sub-label → Cohen's kappa averaged over annotator pairs.
    pub per_sublabel: BTreeMap<String, f64>,
    /// Mean over every (sub-label, pair) combination.
    pub grand_mean: f64,
    pub annotators: Vec<String>,
    pub n_items: usize,
}

/// For each sub-label applied by anyone on `items`, binarizes presence per
/// annotator and item and averages pairwise kappa.
pub fn annotator_agreement(
    annotations: &[Annotation],
    items: &[String],
    codebook: &Codebook,
) -> Result<AgreementReport, ClassifyError> {
    let mut by_key: HashMap<(&str, &str), BTreeSet<String>> = HashMap::new();
    let mut annotators = BTreeSet::new();
    for a in annotations {
        a.validate(codebook).map_err(|e| ClassifyError::Agreement(e.to_string()))?;
        let canonical: BTreeSet<String> =
            a.sublabels.iter().filter_map(|s| codebook.get(s)).map(|s| s.name.clone()).collect();
        if by_key.insert((&a.annotator, &a.item_id), canonical).is_some() {
            return Err(ClassifyError::Agreement(format!(
                "annotator `{}` labeled item `{}` twice",
                a.annotator, a.item_id
            )));
        }
        annotators.insert(a.annotator.as_str());
    }
    if annotators.len() < 2 {
        return Err(ClassifyError::Agreement("need at least two annotators".into()));
    }
    if items.is_empty() {
        return Err(ClassifyError::Agreement("no items".into()));
    }
    let annotators: Vec<&str> = annotators.into_iter().collect();
    let mut rows: Vec<Vec<&BTreeSet<String>>> = Vec::with_capacity(annotators.len());
    for &who in &annotators {
        let mut row = Vec::with_capacity(items.len());
        for item in items {
            let set = by_key
                .get(&(who, item.as_str()))
                .ok_or_else(|| ClassifyError::Agreement(format!("annotator `{who}` is missing item `{item}`")))?;
            row.push(set);
        }
        rows.push(row);
    }
    let applied: BTreeSet<&String> = rows.iter().flatten().flat_map(|s| s.iter()).collect();

    let mut per_sublabel = BTreeMap::new();
    let mut all = Vec::new();
    for label in applied {
        let presence: Vec<Vec<bool>> = rows.iter().map(|r| r.iter().map(|s| s.contains(label)).collect()).collect();
        let mut ks = Vec::new();
        for i in 0..presence.len() {
            for j in (i + 1)..presence.len() {
                let k =
                    cohens_kappa(&presence[i], &presence[j]).map_err(|e| ClassifyError::Agreement(e.to_string()))?;
                ks.push(k.value);
            }
        }
        per_sublabel.insert(label.clone(), ks.iter().sum::<f64>() / ks.len() as f64);
        all.extend(ks);
    }
    let grand_mean = if all.is_empty() { 1.0 } else { all.iter().sum::<f64>() / all.len() as f64 };
    Ok(AgreementReport {
        per_sublabel,
        grand_mean,
        annotators: annotators.into_iter().map(String::from).collect(),
        n_items: items.len(),
    })
}
