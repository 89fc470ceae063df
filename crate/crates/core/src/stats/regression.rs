//! Ordinary least squares and explained-variance decomposition.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::dist::student_t_two_sided;
use super::linalg::least_squares;
use super::{check_finite, mean, StatsError};

/// OLS fit. With an intercept, index 0 of every vector is the intercept and
/// the predictors follow in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub n: usize,
    pub df_residual: usize,
    pub residuals: Vec<f64>,
}

fn design(predictors: &[&[f64]], n: usize, add_intercept: bool) -> Result<Vec<Vec<f64>>, StatsError> {
    let mut columns = Vec::with_capacity(predictors.len() + 1);
    if add_intercept {
        columns.push(vec![1.0; n]);
    }
    for p in predictors {
        if p.len() != n {
            return Err(StatsError::LengthMismatch {
                left: p.len(),
                right: n,
            });
        }
        check_finite(p)?;
        columns.push(p.to_vec());
    }
    Ok(columns)
}

fn r_squared(y: &[f64], residuals: &[f64], centered: bool) -> f64 {
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let my = if centered { mean(y) } else { 0.0 };
    let tss: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if tss == 0.0 {
        0.0
    } else {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    }
}

fn residuals_of(columns: &[Vec<f64>], kept: &[usize], beta: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter()
        .enumerate()
        .map(|(i, &yi)| {
            yi - kept
                .iter()
                .zip(beta)
                .map(|(&k, b)| columns[k][i] * b)
                .sum::<f64>()
        })
        .collect()
}

/// Fits `y = X b` by least squares, `X` given as predictor columns.
///
/// R² is centered when an intercept is present and uncentered otherwise; a
/// constant response yields R² = 0.
pub fn ols(
    predictors: &[&[f64]],
    y: &[f64],
    add_intercept: bool,
) -> Result<RegressionResult, StatsError> {
    let n = y.len();
    check_finite(y)?;
    let columns = design(predictors, n, add_intercept)?;
    let p = columns.len();
    if p == 0 {
        return Err(StatsError::SingularDesign);
    }
    if n <= p {
        return Err(StatsError::InsufficientData { n, required: p + 1 });
    }
    let fit = least_squares(&columns, y);
    if fit.kept.len() < p {
        return Err(StatsError::SingularDesign);
    }
    let residuals = residuals_of(&columns, &fit.kept, &fit.coefficients, y);
    let df_residual = n - p;
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let sigma2 = rss / df_residual as f64;
    let standard_errors: Vec<f64> = fit
        .inverse_gram_diag
        .iter()
        .map(|d| libm::sqrt(sigma2 * d))
        .collect();
    let p_values = fit
        .coefficients
        .iter()
        .zip(&standard_errors)
        .map(|(&b, &se)| {
            if se == 0.0 {
                if b == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                student_t_two_sided(b / se, df_residual as f64)
            }
        })
        .collect();
    Ok(RegressionResult {
        r_squared: r_squared(y, &residuals, add_intercept),
        coefficients: fit.coefficients,
        standard_errors,
        p_values,
        n,
        df_residual,
        residuals,
    })
}

/// R² of each predictor alone and of all predictors jointly (key: names
/// joined with `+`), each with an intercept.
///
/// The joint model drops predictors that are linear combinations of earlier
/// ones, which leaves its R² unchanged.
pub fn variance_decomposition(
    predictors: &[(&str, &[f64])],
    y: &[f64],
) -> Result<BTreeMap<String, f64>, StatsError> {
    if predictors.is_empty() {
        return Err(StatsError::NoData);
    }
    let mut out = BTreeMap::new();
    for (name, x) in predictors {
        out.insert(String::from(*name), ols(&[x], y, true)?.r_squared);
    }
    let n = y.len();
    let all: Vec<&[f64]> = predictors.iter().map(|(_, x)| *x).collect();
    let columns = design(&all, n, true)?;
    if n <= columns.len() {
        return Err(StatsError::InsufficientData {
            n,
            required: columns.len() + 1,
        });
    }
    let fit = least_squares(&columns, y);
    let residuals = residuals_of(&columns, &fit.kept, &fit.coefficients, y);
    let names: Vec<&str> = predictors.iter().map(|(name, _)| *name).collect();
    out.insert(names.join("+"), r_squared(y, &residuals, true));
    Ok(out)
}

pub fn center(x: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let m = mean(x);
    x.iter().map(|v| v - m).collect()
}

/// Centers and divides by the sample standard deviation. A constant input
/// is only centered.
pub fn standardize(x: &[f64]) -> Vec<f64> {
    let c = center(x);
    if c.len() < 2 {
        return c;
    }
    let sd = libm::sqrt(c.iter().map(|v| v * v).sum::<f64>() / (c.len() - 1) as f64);
    if sd == 0.0 {
        c
    } else {
        c.into_iter().map(|v| v / sd).collect()
    }
}

/// Min-max rescaling into `[0, 1]`; a constant input maps to zeros.
pub fn rescale_unit(x: &[f64]) -> Vec<f64> {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![0.0; x.len()];
    }
    x.iter().map(|v| (v - lo) / (hi - lo)).collect()
}
