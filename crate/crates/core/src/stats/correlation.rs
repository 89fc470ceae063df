use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::dist::student_t_two_sided;
use super::{check_finite, mean, StatsError};
use crate::corpus::CorpusItem;

/// Sample Pearson correlation with its two-sided t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::InsufficientData { n, required: 3 });
    }
    check_finite(x)?;
    check_finite(y)?;
    if is_constant(x) || is_constant(y) {
        return Err(StatsError::DegenerateVariance);
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let r = (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if r.abs() == 1.0 {
        0.0
    } else {
        student_t_two_sided(r * libm::sqrt(df / (1.0 - r * r)), df)
    };
    Ok(CorrelationResult { r, p_value, n })
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

/// Correlates description length (characters) with per-description values.
///
/// Items without an entry in `scores` are skipped; a score for a description
/// outside the corpus is an error.
pub fn length_correlation(
    items: &[CorpusItem],
    scores: &BTreeMap<String, f64>,
) -> Result<CorrelationResult, StatsError> {
    let known: BTreeMap<&str, usize> = items
        .iter()
        .map(|i| (i.description_id.as_str(), i.length_chars))
        .collect();
    if let Some(id) = scores.keys().find(|id| !known.contains_key(id.as_str())) {
        return Err(StatsError::UnknownDescription(id.clone()));
    }
    let (lengths, values): (Vec<f64>, Vec<f64>) = items
        .iter()
        .filter_map(|i| {
            scores
                .get(&i.description_id)
                .map(|&s| (i.length_chars as f64, s))
        })
        .unzip();
    pearson(&lengths, &values)
}
