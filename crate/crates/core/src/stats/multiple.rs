use super::StatsError;

/// Bonferroni adjustment over a family of `m` tests: min(1, p·m).
pub fn bonferroni(p_values: &[f64], m: usize) -> Result<Vec<f64>, StatsError> {
    if m < 1 || m < p_values.len() {
        return Err(StatsError::InvalidTestCount);
    }
    Ok(p_values.iter().map(|p| (p * m as f64).min(1.0)).collect())
}
