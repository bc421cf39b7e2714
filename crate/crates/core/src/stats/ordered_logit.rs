//! Proportional-odds ordered logistic regression.
//!
//! P(Y ≤ j | x) = F(θ_j − xβ) with F the logistic CDF. The cutpoints are
//! optimized as θ_1 plus exponentiated increments so every iterate keeps them
//! strictly increasing. The maximizer is damped Newton with backtracking; every
//! accepted step is non-decreasing in log-likelihood.

use nalgebra::{DMatrix, DVector};

use super::design::Design;
use super::dist::normal_two_sided_p;
use super::fit::{FitResult, ModelKind, OddsRatio, TermEstimate};
use super::StatsError;

const Z_975: f64 = 1.959_963_984_540_054;
const DECREMENT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderedLogitOptions {
    pub max_iter: usize,
    /// Stop when the max-norm of the gradient drops below this, or when the
    /// Newton decrement falls under 1e-14 of |log-likelihood|.
    pub grad_tol: f64,
    /// Step shrink factor during backtracking.
    pub damping: f64,
    pub max_backtracks: usize,
    /// Any |β| beyond this is treated as separation.
    pub divergence_bound: f64,
}

impl Default for OrderedLogitOptions {
    fn default() -> Self {
        OrderedLogitOptions { max_iter: 200, grad_tol: 1e-8, damping: 0.5, max_backtracks: 40, divergence_bound: 30.0 }
    }
}

#[inline]
pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn density(z: f64) -> f64 {
    if z.is_infinite() {
        0.0
    } else {
        logistic(z) * logistic(-z)
    }
}

#[inline]
fn density_slope(z: f64) -> f64 {
    if z.is_infinite() {
        0.0
    } else {
        density(z) * (logistic(-z) - logistic(z))
    }
}

/// F(hi) − F(lo) for lo < hi, computed on the side that avoids cancellation.
#[inline]
fn prob_between(lo: f64, hi: f64) -> f64 {
    if lo == f64::NEG_INFINITY {
        logistic(hi)
    } else if hi == f64::INFINITY {
        logistic(-lo)
    } else if lo >= 0.0 {
        logistic(-lo) - logistic(-hi)
    } else {
        logistic(hi) - logistic(lo)
    }
}

/// Category probabilities at linear predictor `eta`.
pub fn category_probabilities(eta: f64, cutpoints: &[f64]) -> Vec<f64> {
    let k = cutpoints.len() + 1;
    (0..k)
        .map(|j| {
            let lo = if j == 0 { f64::NEG_INFINITY } else { cutpoints[j - 1] - eta };
            let hi = if j == k - 1 { f64::INFINITY } else { cutpoints[j] - eta };
            prob_between(lo, hi)
        })
        .collect()
}

struct Problem<'a> {
    design: &'a Design,
    y: &'a [usize],
    n_cut: usize,
}

struct Derivatives {
    gradient: Vec<f64>,
    hessian: DMatrix<f64>,
}

impl Problem<'_> {
    fn n_params(&self) -> usize {
        self.design.n_cols() + self.n_cut
    }

    fn bounds(&self, i: usize, eta: f64, cuts: &[f64]) -> (f64, f64) {
        let j = self.y[i];
        let lo = if j == 0 { f64::NEG_INFINITY } else { cuts[j - 1] - eta };
        let hi = if j == self.n_cut { f64::INFINITY } else { cuts[j] - eta };
        (lo, hi)
    }

    fn loglik(&self, beta: &[f64], cuts: &[f64]) -> f64 {
        let mut ll = 0.0;
        for i in 0..self.design.n_rows() {
            let eta = self.design.row_dot(i, beta);
            let (lo, hi) = self.bounds(i, eta, cuts);
            ll += prob_between(lo, hi).ln();
        }
        ll
    }

    /// Gradient and Hessian in the natural (β, θ) parameters.
    fn derivatives(&self, beta: &[f64], cuts: &[f64]) -> Derivatives {
        let k = self.design.n_cols();
        let p = self.n_params();
        let mut gradient = vec![0.0; p];
        let mut hessian = DMatrix::<f64>::zeros(p, p);
        let mut pos: Vec<usize> = Vec::new();
        let mut av: Vec<f64> = Vec::new();
        let mut bv: Vec<f64> = Vec::new();
        let mut gi: Vec<f64> = Vec::new();
        for i in 0..self.design.n_rows() {
            let (idx, val) = self.design.row(i);
            let eta = idx.iter().zip(val).map(|(&j, v)| beta[j] * v).sum::<f64>();
            let (lo, hi) = self.bounds(i, eta, cuts);
            let prob = prob_between(lo, hi);

            // u_hi = θ_j − η and u_lo = θ_{j−1} − η are linear in the parameters;
            // av / bv hold their gradients on the observation's support.
            let hi_finite = hi.is_finite();
            let lo_finite = lo.is_finite();
            pos.clear();
            av.clear();
            bv.clear();
            for (&j, &v) in idx.iter().zip(val) {
                pos.push(j);
                av.push(if hi_finite { -v } else { 0.0 });
                bv.push(if lo_finite { -v } else { 0.0 });
            }
            let cat = self.y[i];
            if hi_finite {
                pos.push(k + cat);
                av.push(1.0);
                bv.push(0.0);
            }
            if lo_finite {
                pos.push(k + cat - 1);
                av.push(0.0);
                bv.push(1.0);
            }
            let fa = density(hi) / prob;
            let fb = density(lo) / prob;
            let fpa = density_slope(hi) / prob;
            let fpb = density_slope(lo) / prob;
            gi.clear();
            gi.extend(av.iter().zip(&bv).map(|(a, b)| fa * a - fb * b));
            for (s, &ps) in pos.iter().enumerate() {
                gradient[ps] += gi[s];
                for (t, &pt) in pos.iter().enumerate() {
                    hessian[(ps, pt)] += fpa * av[s] * av[t] - fpb * bv[s] * bv[t] - gi[s] * gi[t];
                }
            }
        }
        Derivatives { gradient, hessian }
    }
}

/// Cutpoints from (θ_1, δ_2, …): θ_m = θ_1 + Σ_{l≤m} exp(δ_l).
fn cuts_from_free(free: &[f64]) -> Vec<f64> {
    let mut cuts = Vec::with_capacity(free.len());
    let mut acc = 0.0;
    for (m, &v) in free.iter().enumerate() {
        acc = if m == 0 { v } else { acc + v.exp() };
        cuts.push(acc);
    }
    cuts
}

fn free_from_cuts(cuts: &[f64]) -> Vec<f64> {
    cuts.iter().enumerate().map(|(m, &c)| if m == 0 { c } else { (c - cuts[m - 1]).ln() }).collect()
}

/// Chain rule from natural to free parameters (β unchanged).
fn to_free_space(d: &Derivatives, k: usize, free_cuts: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let p = d.gradient.len();
    let n_cut = p - k;
    // jac[m][l] = ∂θ_m / ∂free_l
    let mut jac = DMatrix::<f64>::zeros(n_cut, n_cut);
    for m in 0..n_cut {
        jac[(m, 0)] = 1.0;
        for l in 1..=m {
            jac[(m, l)] = free_cuts[l].exp();
        }
    }
    let mut g = DVector::from_column_slice(&d.gradient);
    let gc = DVector::from_column_slice(&d.gradient[k..]);
    g.rows_mut(k, n_cut).copy_from(&(jac.transpose() * &gc));

    let mut h = d.hessian.clone();
    let hbc = d.hessian.view((0, k), (k, n_cut)) * &jac;
    let hcc = jac.transpose() * d.hessian.view((k, k), (n_cut, n_cut)) * &jac;
    h.view_mut((0, k), (k, n_cut)).copy_from(&hbc);
    h.view_mut((k, 0), (n_cut, k)).copy_from(&hbc.transpose());
    h.view_mut((k, k), (n_cut, n_cut)).copy_from(&hcc);
    for l in 1..n_cut {
        let tail: f64 = d.gradient[k + l..].iter().sum();
        h[(k + l, k + l)] += free_cuts[l].exp() * tail;
    }
    (g, h)
}

/// Solves (−H) s = g, regularizing −H until it is positive definite.
fn newton_direction(g: &DVector<f64>, h: &DMatrix<f64>) -> DVector<f64> {
    let neg = -h;
    if let Some(ch) = neg.clone().cholesky() {
        return ch.solve(g);
    }
    let scale = neg.diagonal().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut lambda = 1e-8 * scale;
    for _ in 0..30 {
        let shifted = &neg + DMatrix::identity(neg.nrows(), neg.ncols()) * lambda;
        if let Some(ch) = shifted.cholesky() {
            return ch.solve(g);
        }
        lambda *= 10.0;
    }
    g / scale
}

pub fn ordered_logit_fit(design: &Design, y: &[usize], n_categories: usize) -> Result<FitResult, StatsError> {
    ordered_logit_fit_with(design, y, n_categories, &OrderedLogitOptions::default())
}

/// Fits the proportional-odds model. `y` holds categories 0..n_categories.
/// The design must not contain an intercept.
///
/// Separation and iteration exhaustion are reported through
/// `converged = false` and `message`, never as errors.
pub fn ordered_logit_fit_with(
    design: &Design,
    y: &[usize],
    n_categories: usize,
    opts: &OrderedLogitOptions,
) -> Result<FitResult, StatsError> {
    let n = design.n_rows();
    if y.len() != n {
        return Err(StatsError::LengthMismatch { left: n, right: y.len() });
    }
    if n_categories < 2 {
        return Err(StatsError::InvalidInput("need at least two outcome categories".into()));
    }
    if let Some(bad) = y.iter().find(|&&c| c >= n_categories) {
        return Err(StatsError::InvalidInput(format!("category {bad} out of range")));
    }
    let mut counts = vec![0usize; n_categories];
    for &c in y {
        counts[c] += 1;
    }
    if let Some(j) = counts.iter().position(|&c| c == 0) {
        return Err(StatsError::EmptyCategory(j));
    }
    let dependent = design.dependent_columns_given_intercept();
    if !dependent.is_empty() {
        return Err(StatsError::RankDeficient { columns: dependent });
    }

    let k = design.n_cols();
    let n_cut = n_categories - 1;
    let problem = Problem { design, y, n_cut };

    // Start at the intercept-only MLE: empirical cumulative logits.
    let mut cum = 0usize;
    let start_cuts: Vec<f64> = counts[..n_cut]
        .iter()
        .map(|&c| {
            cum += c;
            let q = cum as f64 / n as f64;
            (q / (1.0 - q)).ln()
        })
        .collect();
    let null_loglik: f64 = counts.iter().map(|&c| c as f64 * (c as f64 / n as f64).ln()).sum();

    let mut beta = vec![0.0; k];
    let mut free = free_from_cuts(&start_cuts);
    let mut cuts = start_cuts;
    let mut loglik = problem.loglik(&beta, &cuts);
    let mut trace = vec![loglik];
    let mut converged = false;
    let mut message = None;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let d = problem.derivatives(&beta, &cuts);
        let (g, h) = to_free_space(&d, k, &free);
        if g.amax() < opts.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let step = newton_direction(&g, &h);
        let decrement = g.dot(&step).abs();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let cand_beta: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| b + alpha * s).collect();
            let cand_free: Vec<f64> = free.iter().zip(step.iter().skip(k)).map(|(f, s)| f + alpha * s).collect();
            let cand_cuts = cuts_from_free(&cand_free);
            let ll = problem.loglik(&cand_beta, &cand_cuts);
            if ll.is_finite() && ll >= loglik {
                accepted = Some((cand_beta, cand_free, cand_cuts, ll));
                break;
            }
            alpha *= opts.damping;
        }
        match accepted {
            Some((b, f, c, ll)) => {
                beta = b;
                free = f;
                cuts = c;
                loglik = ll;
                trace.push(ll);
                // at large N the gradient test can sit on summation noise
                if decrement <= DECREMENT_TOL * loglik.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            None => {
                // No ascent left in floating point: converged if the Newton
                // decrement is negligible.
                converged = decrement <= 1e-10 * loglik.abs().max(1.0);
                if !converged {
                    message = Some(format!("line search stalled with gradient max-norm {:.3e}", g.amax()));
                }
                break;
            }
        }
        if let Some(j) = beta.iter().position(|b| b.abs() > opts.divergence_bound) {
            message = Some(format!("separation: |{}| exceeded {}", design.names()[j], opts.divergence_bound));
            break;
        }
    }
    if !converged && message.is_none() {
        message = Some(format!("no convergence after {} iterations", opts.max_iter));
    }

    // Inverse observed information in natural parameters.
    let d = problem.derivatives(&beta, &cuts);
    let cov = (-&d.hessian).cholesky().map(|ch| ch.inverse());
    if cov.is_none() {
        converged = false;
        message.get_or_insert_with(|| "observed information is singular".into());
    }
    let se = |j: usize| cov.as_ref().map_or(f64::NAN, |c| c[(j, j)].max(0.0).sqrt());

    let terms: Vec<TermEstimate> = (0..k)
        .map(|j| {
            let s = se(j);
            let z = beta[j] / s;
            TermEstimate {
                term: design.names()[j].clone(),
                coefficient: beta[j],
                std_error: s,
                statistic: z,
                p_value: if s.is_nan() { f64::NAN } else { normal_two_sided_p(z) },
            }
        })
        .collect();
    let odds_ratios = terms
        .iter()
        .map(|t| OddsRatio {
            term: t.term.clone(),
            ratio: t.coefficient.exp(),
            ci_low: (t.coefficient - Z_975 * t.std_error).exp(),
            ci_high: (t.coefficient + Z_975 * t.std_error).exp(),
        })
        .collect();
    let cutpoints = (0..n_cut)
        .map(|m| {
            let s = se(k + m);
            TermEstimate {
                term: format!("{}|{}", m, m + 1),
                coefficient: cuts[m],
                std_error: s,
                statistic: cuts[m] / s,
                p_value: if s.is_nan() { f64::NAN } else { normal_two_sided_p(cuts[m] / s) },
            }
        })
        .collect();

    Ok(FitResult {
        kind: ModelKind::OrderedLogit,
        terms,
        cutpoints,
        odds_ratios: Some(odds_ratios),
        r_squared: None,
        adj_r_squared: None,
        pseudo_r_squared: Some((1.0 - loglik / null_loglik).max(0.0)),
        log_likelihood: Some(loglik),
        n_obs: n,
        converged,
        iterations,
        loglik_trace: trace,
        message,
    })
}

/// Log-likelihood at given parameters; exposed for diagnostics and tests.
pub fn log_likelihood(design: &Design, y: &[usize], beta: &[f64], cutpoints: &[f64]) -> f64 {
    Problem { design, y, n_cut: cutpoints.len() }.loglik(beta, cutpoints)
}
