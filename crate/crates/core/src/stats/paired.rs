//! Paired-sample tests: t, Wilcoxon signed-rank, and Cohen's d.

use serde::{Deserialize, Serialize};

use super::dist::{normal_two_sided_p, t_two_sided_p};
use super::{mean, sample_sd, StatsError};

/// Largest effective sample size for which the Wilcoxon p-value is exact.
pub const WILCOXON_EXACT_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedT {
    pub mean_diff: f64,
    pub t: f64,
    pub df: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wilcoxon {
    /// Sum of the ranks of positive differences.
    pub statistic: f64,
    pub p_value: f64,
    /// Number of nonzero differences.
    pub n_effective: usize,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTestResult {
    pub mean_diff: f64,
    pub t_stat: f64,
    pub df: usize,
    pub p_value_t: f64,
    pub wilcoxon_stat: f64,
    pub p_value_w: f64,
    pub cohens_d: f64,
    pub n: usize,
}

fn differences(x: &[f64], y: &[f64]) -> Result<Vec<f64>, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { left: x.len(), right: y.len() });
    }
    Ok(x.iter().zip(y).map(|(a, b)| a - b).collect())
}

fn all_identical(d: &[f64]) -> bool {
    d.windows(2).all(|w| w[0] == w[1])
}

pub fn paired_t_test(x: &[f64], y: &[f64]) -> Result<PairedT, StatsError> {
    let d = differences(x, y)?;
    let n = d.len();
    if n < 2 {
        return Err(StatsError::TooFewObservations { needed: 2, got: n });
    }
    let m = mean(&d);
    let df = n - 1;
    let sd = if all_identical(&d) { 0.0 } else { sample_sd(&d) };
    if sd == 0.0 {
        if d[0] == 0.0 {
            return Ok(PairedT { mean_diff: 0.0, t: 0.0, df, p_value: 1.0 });
        }
        return Err(StatsError::DegenerateVariance);
    }
    let t = m / (sd / (n as f64).sqrt());
    let p_value = t_two_sided_p(t, df as f64)?;
    Ok(PairedT { mean_diff: m, t, df, p_value })
}

/// Cohen's d for paired samples: mean(d) / sd(d).
pub fn cohens_d_paired(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    let d = differences(x, y)?;
    if d.len() < 2 {
        return Err(StatsError::TooFewObservations { needed: 2, got: d.len() });
    }
    if all_identical(&d) {
        return Err(StatsError::DegenerateVariance);
    }
    let sd = sample_sd(&d);
    if sd == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    Ok(mean(&d) / sd)
}

/// Midranks of `values` (1-based), averaging over ties.
pub(crate) fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided Wilcoxon signed-rank test. Zero differences are dropped; the
/// p-value is exact for up to [`WILCOXON_EXACT_MAX_N`] nonzero differences and
/// uses the tie-corrected normal approximation with continuity correction
/// beyond that.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<Wilcoxon, StatsError> {
    let d: Vec<f64> = differences(x, y)?.into_iter().filter(|v| *v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return Err(StatsError::AllZeroDifferences);
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = midranks(&abs);
    let w: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();

    if n <= WILCOXON_EXACT_MAX_N {
        let p_value = exact_signed_rank_p(&ranks, w);
        return Ok(Wilcoxon { statistic: w, p_value, n_effective: n, exact: true });
    }

    let nf = n as f64;
    let expected = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_group_sizes(&abs).iter().map(|&t| t * t * t - t).sum::<f64>() / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    let diff = w - expected;
    let z = if diff.abs() <= 0.5 || var <= 0.0 { 0.0 } else { (diff - 0.5 * diff.signum()) / var.sqrt() };
    Ok(Wilcoxon { statistic: w, p_value: normal_two_sided_p(z), n_effective: n, exact: false })
}

fn tie_group_sizes(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        if j > i {
            sizes.push((j - i + 1) as f64);
        }
        i = j + 1;
    }
    sizes
}

// Null distribution of W by dynamic programming over doubled (integer) midranks.
fn exact_signed_rank_p(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let patterns = (1u64 << ranks.len()) as f64;
    let w2 = (w * 2.0).round() as usize;
    let lower: u64 = counts[..=w2].iter().sum();
    let upper: u64 = counts[w2..].iter().sum();
    (2.0 * lower.min(upper) as f64 / patterns).min(1.0)
}

/// Runs all paired statistics on the same pairs.
pub fn paired_tests(x: &[f64], y: &[f64]) -> Result<PairedTestResult, StatsError> {
    let t = paired_t_test(x, y)?;
    let w = wilcoxon_signed_rank(x, y)?;
    let d = cohens_d_paired(x, y)?;
    Ok(PairedTestResult {
        mean_diff: t.mean_diff,
        t_stat: t.t,
        df: t.df,
        p_value_t: t.p_value,
        wilcoxon_stat: w.statistic,
        p_value_w: w.p_value,
        cohens_d: d,
        n: x.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(d: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (d.to_vec(), vec![0.0; d.len()])
    }

    #[test]
    fn t_on_one_to_five() {
        let (x, y) = pairs(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let r = paired_t_test(&x, &y).unwrap();
        assert!((r.t - 4.242_640_687_119_285).abs() < 1e-12);
        assert_eq!(r.df, 4);
        // mpmath: 2 * (1 - T_4(3 / (sqrt(2.5) / sqrt(5))))
        assert!((r.p_value - 0.013_235_599_563_682_7).abs() < 1e-10);
    }

    #[test]
    fn t_zero_differences() {
        let x = [1.0, 2.0, 3.0];
        let r = paired_t_test(&x, &x).unwrap();
        assert_eq!((r.t, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn t_degenerate_and_short() {
        let (x, y) = pairs(&[2.0, 2.0, 2.0]);
        assert_eq!(paired_t_test(&x, &y), Err(StatsError::DegenerateVariance));
        assert!(matches!(paired_t_test(&[1.0], &[0.0]), Err(StatsError::TooFewObservations { .. })));
        assert!(matches!(paired_t_test(&[1.0, 2.0], &[0.0]), Err(StatsError::LengthMismatch { .. })));
    }

    #[test]
    fn cohens_d_examples() {
        let (x, y) = pairs(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!((cohens_d_paired(&x, &y).unwrap() - 1.897_366_596_101_028).abs() < 1e-12);
        assert_eq!(cohens_d_paired(&x, &x), Err(StatsError::DegenerateVariance));
    }

    #[test]
    fn cohens_d_small_spread_scaling() {
        // d = [c, c+e, c-e]: mean c, sd e, so d = c / e
        for (c, e) in [(1.0, 1e-3), (0.5, 1e-5), (-2.0, 0.25)] {
            let (x, y) = pairs(&[c, c + e, c - e]);
            let got = cohens_d_paired(&x, &y).unwrap();
            assert!((got / (c / e) - 1.0).abs() < 1e-6, "c={c} e={e} got={got}");
        }
    }

    #[test]
    fn cohens_d_matches_t_over_root_n() {
        let x = [0.3, 0.1, 0.7, 0.2, 0.9, 0.4];
        let y = [0.1, 0.2, 0.3, 0.0, 0.5, 0.1];
        let t = paired_t_test(&x, &y).unwrap();
        let d = cohens_d_paired(&x, &y).unwrap();
        assert!((d - t.t / 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn wilcoxon_small_exact() {
        let (x, y) = pairs(&[1.0, 2.0, 3.0]);
        let w = wilcoxon_signed_rank(&x, &y).unwrap();
        assert_eq!(w.statistic, 6.0);
        assert!((w.p_value - 0.25).abs() < 1e-15);
        assert!(w.exact);
    }

    #[test]
    fn wilcoxon_symmetric_pair() {
        let (x, y) = pairs(&[2.5, -2.5]);
        let w = wilcoxon_signed_rank(&x, &y).unwrap();
        assert_eq!(w.statistic, 1.5);
        assert_eq!(w.p_value, 1.0);
    }

    #[test]
    fn wilcoxon_drops_zeros_and_rejects_all_zero() {
        let (x, y) = pairs(&[0.0, 1.0, 0.0, 2.0, 3.0]);
        let w = wilcoxon_signed_rank(&x, &y).unwrap();
        assert_eq!(w.n_effective, 3);
        assert_eq!(w.statistic, 6.0);
        let (x, y) = pairs(&[0.0, 0.0]);
        assert_eq!(wilcoxon_signed_rank(&x, &y), Err(StatsError::AllZeroDifferences));
    }

    #[test]
    fn wilcoxon_normal_approximation() {
        // 20 differences 1..=20 all positive: W = 210, mean 105, var 717.5
        let d: Vec<f64> = (1..=20).map(f64::from).collect();
        let (x, y) = pairs(&d);
        let w = wilcoxon_signed_rank(&x, &y).unwrap();
        assert!(!w.exact);
        assert_eq!(w.statistic, 210.0);
        let z = (210.0 - 105.0 - 0.5) / 717.5f64.sqrt();
        assert!((w.p_value - normal_two_sided_p(z)).abs() < 1e-15);
    }

    #[test]
    fn midranks_with_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }
}
