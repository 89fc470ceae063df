//! Referenceless metric kernels.
//!
//! Embedding inputs are `f32` (encoder precision); all arithmetic is carried
//! out in `f64`.

mod flow;
mod similarity;
mod stopwords;

use alloc::string::String;

pub use flow::{information_flow, layer_maxima, median, normalized_mutual_information, spurts};
pub use similarity::{clipscore, contextual_clipscore, cosine, ContextMode};
pub use stopwords::{strip_stopwords, StopwordList, StopwordError, ENGLISH_STOPWORDS_VERSION};

use crate::corpus::AttentionStack;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("dimension mismatch: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },
    #[error("vector has zero norm")]
    DegenerateVector,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(&'static str),
    #[error("invalid attention at row {row}: {reason}")]
    InvalidAttention { row: usize, reason: &'static str },
    #[error("scale must be positive and finite")]
    InvalidScale,
}

/// Scores of one description under every metric variant.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricResult {
    pub description_id: String,
    pub clipscore: f64,
    pub contextual_clipscore: Option<f64>,
    pub contextual_clipscore_normalized: Option<f64>,
    pub spurts: Option<f64>,
}

/// Embeddings and optional attention needed to score one description.
#[derive(Debug, Clone, Copy)]
pub struct ScoreInputs<'a> {
    pub image: &'a [f32],
    pub description: &'a [f32],
    pub context: Option<&'a [f32]>,
    pub attention: Option<&'a AttentionStack>,
}

/// Which contextual variants to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextModes {
    pub literal: bool,
    pub normalized: bool,
}

impl ContextModes {
    pub const BOTH: ContextModes = ContextModes {
        literal: true,
        normalized: true,
    };
}

pub fn score_description(
    description_id: &str,
    inputs: ScoreInputs<'_>,
    scale: f64,
    modes: ContextModes,
) -> Result<MetricResult, MetricError> {
    let clip = clipscore(inputs.image, inputs.description, scale)?;
    let (mut literal, mut normalized) = (None, None);
    if let Some(context) = inputs.context {
        if modes.literal {
            literal = Some(contextual_clipscore(
                inputs.description,
                context,
                inputs.image,
                ContextMode::Literal,
            )?);
        }
        if modes.normalized {
            normalized = Some(contextual_clipscore(
                inputs.description,
                context,
                inputs.image,
                ContextMode::FullyNormalized,
            )?);
        }
    }
    let spurts = inputs.attention.map(spurts).transpose()?;
    Ok(MetricResult {
        description_id: description_id.into(),
        clipscore: clip,
        contextual_clipscore: literal,
        contextual_clipscore_normalized: normalized,
        spurts,
    })
}
