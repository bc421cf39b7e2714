use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::StatsError;

/// Cohen's kappa with a flag for the degenerate case where chance agreement
/// is 1 (both raters used a single, identical category).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub value: f64,
    pub observed: f64,
    pub expected: f64,
    pub degenerate_marginals: bool,
}

/// κ = (p_o − p_e) / (1 − p_e) over any ordered label alphabet.
pub fn cohens_kappa<T: Ord>(a: &[T], b: &[T]) -> Result<Kappa, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Err(StatsError::TooFewObservations { needed: 1, got: 0 });
    }
    let n = a.len() as f64;
    let mut agree = 0usize;
    let mut margins: BTreeMap<&T, (usize, usize)> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        if x == y {
            agree += 1;
        }
        margins.entry(x).or_default().0 += 1;
        margins.entry(y).or_default().1 += 1;
    }
    let observed = agree as f64 / n;
    let expected: f64 = margins.values().map(|&(ca, cb)| (ca as f64 / n) * (cb as f64 / n)).sum();
    // p_e == 1 happens exactly when both raters put every item in one shared category.
    if margins.len() == 1 {
        let value = if observed == 1.0 { 1.0 } else { 0.0 };
        return Ok(Kappa { value, observed, expected: 1.0, degenerate_marginals: true });
    }
    Ok(Kappa { value: (observed - expected) / (1.0 - expected), observed, expected, degenerate_marginals: false })
}
