//! Attention information flow and the SPURTS reduction.

use alloc::vec::Vec;

use super::MetricError;
use crate::corpus::{AttentionStack, ATTENTION_ROW_TOLERANCE};

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

fn entropy(probabilities: impl Iterator<Item = f64>) -> f64 {
    // 0·ln 0 = 0
    -compensated_sum(
        probabilities
            .filter(|&p| p > 0.0)
            .map(|p| p * libm::log(p)),
    )
}

/// `2·I(X;Y) / (H(X) + H(Y))` of a row-major `rows x cols` joint histogram.
///
/// The joint is renormalized to sum to one. Natural logarithms are used; the
/// ratio does not depend on the base. When both marginals have zero entropy
/// the result is defined as 0.
pub fn normalized_mutual_information(
    joint: &[f64],
    rows: usize,
    cols: usize,
) -> Result<f64, MetricError> {
    if rows * cols != joint.len() || joint.is_empty() {
        return Err(MetricError::ShapeMismatch {
            left: joint.len(),
            right: rows * cols,
        });
    }
    if joint.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(MetricError::InvalidDistribution(
            "entries must be finite and non-negative",
        ));
    }
    let total = compensated_sum(joint.iter().copied());
    if total <= 0.0 {
        return Err(MetricError::InvalidDistribution("all entries are zero"));
    }

    let p = |r: usize, c: usize| joint[r * cols + c] / total;
    let row_marginal: Vec<f64> = (0..rows)
        .map(|r| compensated_sum((0..cols).map(|c| p(r, c))))
        .collect();
    let col_marginal: Vec<f64> = (0..cols)
        .map(|c| compensated_sum((0..rows).map(|r| p(r, c))))
        .collect();
    let denom = entropy(row_marginal.iter().copied()) + entropy(col_marginal.iter().copied());
    if denom <= 0.0 {
        return Ok(0.0);
    }
    // Summing I directly avoids the cancellation in H(X) + H(Y) - H(X,Y).
    let mutual = compensated_sum((0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).filter_map(
        |(r, c)| {
            let pxy = p(r, c);
            (pxy > 0.0).then(|| pxy * libm::log(pxy / (row_marginal[r] * col_marginal[c])))
        },
    ));
    Ok((2.0 * mutual / denom).clamp(0.0, 1.0))
}

/// NMI between query and key positions of one head, reading the row-stochastic
/// `tokens x tokens` attention matrix divided by `tokens` as their joint
/// distribution (uniform over queries).
pub fn information_flow(attention: &[f32], tokens: usize) -> Result<f64, MetricError> {
    if tokens == 0 || attention.len() != tokens * tokens {
        return Err(MetricError::ShapeMismatch {
            left: attention.len(),
            right: tokens * tokens,
        });
    }
    let t = tokens as f64;
    let mut joint = Vec::with_capacity(attention.len());
    for (row, values) in attention.chunks_exact(tokens).enumerate() {
        let mut sum = 0.0;
        for &v in values {
            if !v.is_finite() || v < 0.0 {
                return Err(MetricError::InvalidAttention {
                    row,
                    reason: "negative or non-finite weight",
                });
            }
            sum += f64::from(v);
            joint.push(f64::from(v) / t);
        }
        if (sum - 1.0).abs() > ATTENTION_ROW_TOLERANCE {
            return Err(MetricError::InvalidAttention {
                row,
                reason: "row does not sum to one",
            });
        }
    }
    normalized_mutual_information(&joint, tokens, tokens)
}

/// Per-layer maximum of the head-wise information flow.
pub fn layer_maxima(stack: &AttentionStack) -> Result<Vec<f64>, MetricError> {
    (0..stack.layers)
        .map(|layer| {
            let mut best = f64::NEG_INFINITY;
            for head in 0..stack.heads {
                best = best.max(information_flow(stack.head(layer, head), stack.tokens)?);
            }
            Ok(best)
        })
        .collect()
}

/// Median; even-length input averages the two central order statistics.
/// Returns `None` on empty input.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    })
}

/// Layer-wise median of head-wise maximum information flow.
pub fn spurts(stack: &AttentionStack) -> Result<f64, MetricError> {
    let maxima = layer_maxima(stack)?;
    // AttentionStack guarantees at least one layer.
    Ok(median(&maxima).unwrap_or(0.0))
}
