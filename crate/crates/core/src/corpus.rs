//! Corpus data model: descriptions in context, Likert judgments, embeddings
//! and attention stacks.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// Tolerance on attention row sums.
pub const ATTENTION_ROW_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("empty identifier in field `{0}`")]
    EmptyId(&'static str),
    #[error("unknown {field} token `{token}`")]
    UnknownToken { field: &'static str, token: String },
    #[error("rating value {0} outside 1..=5")]
    RangeError(i64),
    #[error("embedding `{0}` is empty")]
    ZeroDimension(String),
    #[error("embedding `{id}` has a non-finite component at index {index}")]
    NonFinite { id: String, index: usize },
    #[error("attention `{id}`: expected shape [L, H, T, T], got {shape:?}")]
    AttentionShape { id: String, shape: Vec<usize> },
    #[error("attention `{id}`: {len} values do not fill shape {shape:?}")]
    AttentionLength { id: String, shape: Vec<usize>, len: usize },
    #[error("attention `{id}` layer {layer} head {head} row {row}: {reason}")]
    InvalidAttention {
        id: String,
        layer: usize,
        head: usize,
        row: usize,
        reason: String,
    },
    #[error("duplicate rating for description `{description_id}` by rater `{rater_id}` ({group}, {dimension})")]
    DuplicateRating {
        description_id: String,
        rater_id: String,
        group: Group,
        dimension: Dimension,
    },
    #[error("duplicate description id `{0}`")]
    DuplicateDescription(String),
    #[error("rating references unknown description `{0}`")]
    DanglingReference(String),
}

/// Rater population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    Blv,
    SightedNoImg,
    SightedWithImg,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::Blv, Group::SightedNoImg, Group::SightedWithImg];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Blv => "blv",
            Group::SightedNoImg => "sighted_no_img",
            Group::SightedWithImg => "sighted_with_img",
        }
    }

    /// Whether a dimension was elicited from this group at all. Sighted raters
    /// who already saw the image were not asked about imaginability.
    pub fn measures(self, dimension: Dimension) -> bool {
        !(self == Group::SightedWithImg && dimension == Dimension::Imaginability)
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Group::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| CorpusError::UnknownToken {
                field: "group",
                token: s.to_string(),
            })
    }
}

/// Rating question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    Overall,
    Imaginability,
    Relevance,
    Irrelevance,
    Fit,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::Overall,
        Dimension::Imaginability,
        Dimension::Relevance,
        Dimension::Irrelevance,
        Dimension::Fit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Overall => "overall",
            Dimension::Imaginability => "imaginability",
            Dimension::Relevance => "relevance",
            Dimension::Irrelevance => "irrelevance",
            Dimension::Fit => "fit",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| CorpusError::UnknownToken {
                field: "dimension",
                token: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EmbeddingKind {
    Image,
    Description,
    Context,
}

impl EmbeddingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EmbeddingKind::Image => "image",
            EmbeddingKind::Description => "description",
            EmbeddingKind::Context => "context",
        }
    }
}

impl fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One description written for an image inside a context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusItem {
    pub description_id: String,
    pub image_id: String,
    pub context_id: String,
    pub description_text: String,
    /// Unicode scalar values in `description_text`.
    pub length_chars: usize,
}

impl CorpusItem {
    pub fn new(
        description_id: impl Into<String>,
        image_id: impl Into<String>,
        context_id: impl Into<String>,
        description_text: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let description_id = non_empty(description_id.into(), "description_id")?;
        let image_id = non_empty(image_id.into(), "image_id")?;
        let context_id = non_empty(context_id.into(), "context_id")?;
        let description_text = description_text.into();
        let length_chars = description_text.chars().count();
        Ok(Self {
            description_id,
            image_id,
            context_id,
            description_text,
            length_chars,
        })
    }
}

/// One Likert judgment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingRecord {
    pub description_id: String,
    pub rater_id: String,
    pub group: Group,
    pub dimension: Dimension,
    pub value: u8,
}

impl RatingRecord {
    pub fn new(
        description_id: impl Into<String>,
        rater_id: impl Into<String>,
        group: Group,
        dimension: Dimension,
        value: i64,
    ) -> Result<Self, CorpusError> {
        if !(1..=5).contains(&value) {
            return Err(CorpusError::RangeError(value));
        }
        Ok(Self {
            description_id: non_empty(description_id.into(), "description_id")?,
            rater_id: non_empty(rater_id.into(), "rater_id")?,
            group,
            dimension,
            value: value as u8,
        })
    }
}

fn non_empty(s: String, field: &'static str) -> Result<String, CorpusError> {
    if s.is_empty() {
        Err(CorpusError::EmptyId(field))
    } else {
        Ok(s)
    }
}

/// Checks the cross-record invariants of a corpus: unique description ids,
/// unique `(description, rater, group, dimension)` keys, and no rating that
/// points at a description outside `items`.
pub fn check_corpus(items: &[CorpusItem], ratings: &[RatingRecord]) -> Result<(), CorpusError> {
    let mut ids = BTreeSet::new();
    for item in items {
        if !ids.insert(item.description_id.as_str()) {
            return Err(CorpusError::DuplicateDescription(item.description_id.clone()));
        }
    }
    let mut keys = BTreeSet::new();
    for r in ratings {
        if !ids.contains(r.description_id.as_str()) {
            return Err(CorpusError::DanglingReference(r.description_id.clone()));
        }
        if !keys.insert((r.description_id.as_str(), r.rater_id.as_str(), r.group, r.dimension)) {
            return Err(CorpusError::DuplicateRating {
                description_id: r.description_id.clone(),
                rater_id: r.rater_id.clone(),
                group: r.group,
                dimension: r.dimension,
            });
        }
    }
    Ok(())
}

/// A finite, non-empty encoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub item_id: String,
    pub kind: EmbeddingKind,
    pub vector: Vec<f32>,
    pub model_id: String,
}

impl EmbeddingRecord {
    pub fn new(
        item_id: impl Into<String>,
        kind: EmbeddingKind,
        vector: Vec<f32>,
        model_id: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let item_id = non_empty(item_id.into(), "item_id")?;
        if vector.is_empty() {
            return Err(CorpusError::ZeroDimension(item_id));
        }
        if let Some(index) = vector.iter().position(|v| !v.is_finite()) {
            return Err(CorpusError::NonFinite { id: item_id, index });
        }
        Ok(Self {
            item_id,
            kind,
            vector,
            model_id: model_id.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

/// Attention weights of one text, shaped `[layers, heads, tokens, tokens]`.
/// Row `weights[l, h, q, ..]` is the distribution of query token `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionStack {
    pub item_id: String,
    pub layers: usize,
    pub heads: usize,
    pub tokens: usize,
    weights: Vec<f32>,
}

impl AttentionStack {
    pub fn new(
        item_id: impl Into<String>,
        shape: &[usize],
        weights: Vec<f32>,
    ) -> Result<Self, CorpusError> {
        let item_id = non_empty(item_id.into(), "item_id")?;
        let [layers, heads, tokens, keys] = *shape else {
            return Err(CorpusError::AttentionShape {
                id: item_id,
                shape: shape.to_vec(),
            });
        };
        if tokens != keys || tokens == 0 || layers == 0 || heads == 0 {
            return Err(CorpusError::AttentionShape {
                id: item_id,
                shape: shape.to_vec(),
            });
        }
        if layers * heads * tokens * tokens != weights.len() {
            return Err(CorpusError::AttentionLength {
                id: item_id,
                shape: shape.to_vec(),
                len: weights.len(),
            });
        }
        let stack = Self {
            item_id,
            layers,
            heads,
            tokens,
            weights,
        };
        stack.check_rows()?;
        Ok(stack)
    }

    fn check_rows(&self) -> Result<(), CorpusError> {
        let t = self.tokens;
        for layer in 0..self.layers {
            for head in 0..self.heads {
                for (row, values) in self.head(layer, head).chunks_exact(t).enumerate() {
                    let reason = if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                        Some(String::from("negative or non-finite weight"))
                    } else {
                        let sum: f64 = values.iter().map(|&v| f64::from(v)).sum();
                        if (sum - 1.0).abs() > ATTENTION_ROW_TOLERANCE {
                            Some(alloc::format!("row sums to {sum}"))
                        } else {
                            None
                        }
                    };
                    if let Some(reason) = reason {
                        return Err(CorpusError::InvalidAttention {
                            id: self.item_id.clone(),
                            layer,
                            head,
                            row,
                            reason,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Row-major `tokens x tokens` attention matrix of one head.
    pub fn head(&self, layer: usize, head: usize) -> &[f32] {
        let size = self.tokens * self.tokens;
        let start = (layer * self.heads + head) * size;
        &self.weights[start..start + size]
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.layers, self.heads, self.tokens, self.tokens]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn length_counts_scalar_values() {
        let item = CorpusItem::new("d1", "i1", "c1", "A gazebo, in a park.").unwrap();
        assert_eq!(item.length_chars, 20);
        let item = CorpusItem::new("d2", "i1", "c1", "Café ☕").unwrap();
        assert_eq!(item.length_chars, 6);
        assert_eq!(item.description_text.len(), 9);
    }

    #[test]
    fn empty_ids_rejected() {
        assert_eq!(
            CorpusItem::new("", "i", "c", "x"),
            Err(CorpusError::EmptyId("description_id"))
        );
    }

    #[test]
    fn rating_range() {
        for bad in [0, 6, -1] {
            assert_eq!(
                RatingRecord::new("d", "r", Group::Blv, Dimension::Fit, bad),
                Err(CorpusError::RangeError(bad))
            );
        }
        assert!(RatingRecord::new("d", "r", Group::Blv, Dimension::Fit, 5).is_ok());
    }

    #[test]
    fn tokens_round_trip() {
        for g in Group::ALL {
            assert_eq!(g.as_str().parse::<Group>().unwrap(), g);
        }
        for d in Dimension::ALL {
            assert_eq!(d.as_str().parse::<Dimension>().unwrap(), d);
        }
        assert!(matches!(
            "Overall".parse::<Dimension>(),
            Err(CorpusError::UnknownToken { field: "dimension", .. })
        ));
    }

    #[test]
    fn corpus_cross_checks() {
        let items = vec![CorpusItem::new("d1", "i1", "c1", "x").unwrap()];
        let ok = RatingRecord::new("d1", "r1", Group::Blv, Dimension::Overall, 3).unwrap();
        let dangling = RatingRecord::new("d9", "r1", Group::Blv, Dimension::Overall, 3).unwrap();
        assert!(check_corpus(&items, core::slice::from_ref(&ok)).is_ok());
        assert_eq!(
            check_corpus(&items, &[dangling]),
            Err(CorpusError::DanglingReference("d9".into()))
        );
        assert!(matches!(
            check_corpus(&items, &[ok.clone(), ok]),
            Err(CorpusError::DuplicateRating { .. })
        ));
    }

    #[test]
    fn embedding_invariants() {
        assert!(EmbeddingRecord::new("x", EmbeddingKind::Image, vec![], "m").is_err());
        assert_eq!(
            EmbeddingRecord::new("x", EmbeddingKind::Image, vec![1.0, f32::NAN], "m"),
            Err(CorpusError::NonFinite { id: "x".into(), index: 1 })
        );
        assert_eq!(
            EmbeddingRecord::new("x", EmbeddingKind::Image, vec![1.0, 2.0], "m")
                .unwrap()
                .dim(),
            2
        );
    }

    #[test]
    fn attention_invariants() {
        let ok = AttentionStack::new("a", &[1, 1, 2, 2], vec![0.5, 0.5, 0.0, 1.0]).unwrap();
        assert_eq!(ok.head(0, 0), &[0.5, 0.5, 0.0, 1.0]);
        assert!(matches!(
            AttentionStack::new("a", &[1, 1, 2, 2], vec![0.5, 0.4, 0.0, 1.0]),
            Err(CorpusError::InvalidAttention { row: 0, .. })
        ));
        assert!(matches!(
            AttentionStack::new("a", &[1, 1, 2, 2], vec![1.5, -0.5, 0.0, 1.0]),
            Err(CorpusError::InvalidAttention { .. })
        ));
        assert!(matches!(
            AttentionStack::new("a", &[1, 1, 0, 0], vec![]),
            Err(CorpusError::AttentionShape { .. })
        ));
        assert!(matches!(
            AttentionStack::new("a", &[1, 2, 3], vec![]),
            Err(CorpusError::AttentionShape { .. })
        ));
        assert!(matches!(
            AttentionStack::new("a", &[1, 1, 2, 2], vec![1.0; 3]),
            Err(CorpusError::AttentionLength { .. })
        ));
    }

    #[test]
    fn imaginability_absent_with_image() {
        assert!(!Group::SightedWithImg.measures(Dimension::Imaginability));
        assert!(Group::SightedWithImg.measures(Dimension::Fit));
        assert!(Group::Blv.measures(Dimension::Imaginability));
    }
}
