//! Shuffled-pair compatibility test over CLIPScore.

use std::cell::RefCell;

use ctxscore_core::corpus::{CorpusItem, EmbeddingKind};
use ctxscore_core::metrics::{clipscore, MetricError};
use ctxscore_core::stats::{shuffle_test, significance_stars, StatsError};
use serde::{Deserialize, Serialize};

use crate::analyze::OLS_NOTE;
use crate::score::{EmbeddingSet, ScoreError};

#[derive(Debug, thiserror::Error)]
pub enum ShuffleError {
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("scoring image `{image_id}` with description `{description_id}`: {source}")]
    Metric {
        image_id: String,
        description_id: String,
        source: MetricError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuffledPair {
    pub description_id: String,
    pub image_id: String,
}

/// Output of `ctxscore shuffle`.
///
/// `regression_beta` and `regression_se` are in the units of the scaled
/// score; the `_unscaled` fields divide out `scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuffleReport {
    pub report_version: u32,
    pub note: String,
    pub seed: u64,
    pub scale: f64,
    pub n_pairs: usize,
    pub ordered_mean: f64,
    pub shuffled_mean: f64,
    pub regression_beta: f64,
    pub regression_se: f64,
    pub regression_beta_unscaled: f64,
    pub regression_se_unscaled: f64,
    pub p_value: f64,
    pub stars: String,
    pub shuffled_pairs: Vec<ShuffledPair>,
}

pub fn run_shuffle(
    items: &[CorpusItem],
    images: &EmbeddingSet,
    descriptions: &EmbeddingSet,
    seed: u64,
    scale: f64,
) -> Result<ShuffleReport, ShuffleError> {
    for item in items {
        images.require(&item.image_id)?;
        descriptions.require(&item.description_id)?;
    }
    if images.dim != descriptions.dim && !images.is_empty() && !descriptions.is_empty() {
        return Err(ScoreError::ModelMismatch {
            item_id: items.first().map(|i| i.description_id.clone()).unwrap_or_default(),
            kind: EmbeddingKind::Description,
            expected: images.dim,
            found: descriptions.dim,
        }
        .into());
    }
    let failure = RefCell::new(None);
    let score = |img: &str, desc: &str| {
        let image = images.get(img).expect("checked above");
        let description = descriptions.get(desc).expect("checked above");
        clipscore(image, description, scale).unwrap_or_else(|source| {
            failure.borrow_mut().get_or_insert(ShuffleError::Metric {
                image_id: img.to_string(),
                description_id: desc.to_string(),
                source,
            });
            0.0
        })
    };
    let result = shuffle_test(score, items, seed);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let result = result?;
    let shuffled_pairs = items
        .iter()
        .zip(&result.assignment)
        .map(|(item, &j)| ShuffledPair {
            description_id: item.description_id.clone(),
            image_id: items[j].image_id.clone(),
        })
        .collect();
    Ok(ShuffleReport {
        report_version: 1,
        note: OLS_NOTE.to_string(),
        seed,
        scale,
        n_pairs: result.n_pairs,
        ordered_mean: result.ordered_mean,
        shuffled_mean: result.shuffled_mean,
        regression_beta: result.regression_beta,
        regression_se: result.regression_se,
        regression_beta_unscaled: result.regression_beta / scale,
        regression_se_unscaled: result.regression_se / scale,
        p_value: result.p_value,
        stars: significance_stars(result.p_value).to_string(),
        shuffled_pairs,
    })
}
