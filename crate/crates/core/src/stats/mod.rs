//! Statistics used to compare metric scores with human judgments.
//!
//! Everything here is `f64`. Randomized procedures take explicit `u64` seeds.

mod aggregate;
mod correlation;
pub mod dist;
mod linalg;
mod regression;
mod shuffle;

use alloc::string::String;

pub use aggregate::{aggregate_ratings, AggregatedRating};
pub use correlation::{length_correlation, pearson, CorrelationResult};
pub use regression::{
    center, ols, rescale_unit, standardize, variance_decomposition, RegressionResult,
};
pub use shuffle::{derangement, shuffle_test, ShuffleTestResult, MAX_DERANGEMENT_ATTEMPTS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("no data for the requested selection")]
    NoData,
    #[error("insufficient data: {n} observations, need at least {required}")]
    InsufficientData { n: usize, required: usize },
    #[error("zero variance")]
    DegenerateVariance,
    #[error("design matrix is rank deficient")]
    SingularDesign,
    #[error("cannot derange: {0}")]
    CannotDerange(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite input value")]
    NonFinite,
    #[error("unknown description `{0}`")]
    UnknownDescription(String),
}

/// `*` p<.05, `**` p<.01, `***` p<.001.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub(crate) fn check_finite(values: &[f64]) -> Result<(), StatsError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}
