//! Ordinary least squares via Householder QR.

use nalgebra::{DMatrix, DVector};

use super::design::Design;
use super::dist::t_two_sided_p;
use super::fit::{FitResult, ModelKind, TermEstimate};
use super::StatsError;

// |R_jj| below this fraction of the column norm marks column j as dependent.
const RANK_TOL: f64 = 1e-10;

/// Fits y = Xβ + ε. The design must carry its own intercept column.
pub fn ols_fit(design: &Design, y: &[f64]) -> Result<FitResult, StatsError> {
    let n = design.n_rows();
    let k = design.n_cols();
    if y.len() != n {
        return Err(StatsError::LengthMismatch { left: n, right: y.len() });
    }
    if n <= k {
        return Err(StatsError::TooFewObservations { needed: k + 1, got: n });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidInput("non-finite outcome".into()));
    }
    let x = design.to_dense();
    let col_norms: Vec<f64> = (0..k).map(|j| x.column(j).norm()).collect();

    let qr = x.clone().qr();
    let r = qr.r();
    let dependent: Vec<String> = (0..k)
        .filter(|&j| col_norms[j] == 0.0 || r[(j, j)].abs() <= RANK_TOL * col_norms[j])
        .map(|j| design.names()[j].clone())
        .collect();
    if !dependent.is_empty() {
        return Err(StatsError::RankDeficient { columns: dependent });
    }

    let mut qty = DVector::from_column_slice(y);
    qr.q_tr_mul(&mut qty);
    let rhs = qty.rows(0, k).into_owned();
    let beta =
        r.solve_upper_triangular(&rhs).ok_or_else(|| StatsError::RankDeficient { columns: design.names().to_vec() })?;

    let fitted = &x * &beta;
    let rss: f64 = y.iter().zip(fitted.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();
    let df = (n - k) as f64;
    let sigma2 = rss / df;

    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| StatsError::RankDeficient { columns: design.names().to_vec() })?;
    let terms = (0..k)
        .map(|j| {
            // (R^T R)^{-1}_jj = sum_m Rinv[j, m]^2
            let var = sigma2 * r_inv.row(j).iter().map(|v| v * v).sum::<f64>();
            let se = var.sqrt();
            let coefficient = beta[j];
            let statistic = coefficient / se;
            let p_value = if se > 0.0 { t_two_sided_p(statistic, df.max(1.0))? } else { 0.0 };
            Ok(TermEstimate { term: design.names()[j].clone(), coefficient, std_error: se, statistic, p_value })
        })
        .collect::<Result<Vec<_>, StatsError>>()?;

    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let adj = 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / df;
    Ok(FitResult {
        kind: ModelKind::Ols,
        terms,
        cutpoints: Vec::new(),
        odds_ratios: None,
        r_squared: Some(r_squared),
        adj_r_squared: Some(adj),
        pseudo_r_squared: None,
        log_likelihood: None,
        n_obs: n,
        converged: true,
        iterations: 0,
        loglik_trace: Vec::new(),
        message: None,
    })
}
