//! Scoring a corpus from embedding and attention containers.

use std::collections::BTreeMap;

use ctxscore_core::corpus::{AttentionStack, CorpusError, CorpusItem, EmbeddingKind, EmbeddingRecord};
use ctxscore_core::metrics::{score_description, ContextModes, MetricError, MetricResult, ScoreInputs};
use rayon::prelude::*;

use crate::container::TensorContainer;

#[derive(Debug, thiserror::Error)]
pub enum ScoreError {
    #[error("missing {kind} embedding for `{item_id}`")]
    MissingEmbedding { item_id: String, kind: EmbeddingKind },
    #[error("{kind} embedding `{item_id}` has dimension {found}, expected {expected}")]
    ModelMismatch {
        item_id: String,
        kind: EmbeddingKind,
        expected: usize,
        found: usize,
    },
    #[error("{kind} embedding `{item_id}` must have shape [d], got {shape:?}")]
    EmbeddingShape {
        item_id: String,
        kind: EmbeddingKind,
        shape: Vec<usize>,
    },
    #[error(transparent)]
    Invalid(#[from] CorpusError),
    #[error("attention for `{0}` supplied more than once")]
    DuplicateAttention(String),
    #[error("scoring `{description_id}`: {source}")]
    Metric {
        description_id: String,
        source: MetricError,
    },
}

/// Vectors of one kind, all of the same dimension.
#[derive(Debug, Clone)]
pub struct EmbeddingSet {
    pub kind: EmbeddingKind,
    pub dim: usize,
    records: BTreeMap<String, EmbeddingRecord>,
}

impl EmbeddingSet {
    /// Reads entries named by item id with shape `[d]`.
    pub fn from_container(
        container: &TensorContainer,
        kind: EmbeddingKind,
        model_id: &str,
    ) -> Result<Self, ScoreError> {
        let mut records = BTreeMap::new();
        let mut dim = None;
        for (name, t) in &container.entries {
            if t.shape.len() != 1 {
                return Err(ScoreError::EmbeddingShape {
                    item_id: name.clone(),
                    kind,
                    shape: t.shape.clone(),
                });
            }
            let rec = EmbeddingRecord::new(name.as_str(), kind, t.data.clone(), model_id)?;
            let expected = *dim.get_or_insert(rec.dim());
            if rec.dim() != expected {
                return Err(ScoreError::ModelMismatch {
                    item_id: name.clone(),
                    kind,
                    expected,
                    found: rec.dim(),
                });
            }
            records.insert(name.clone(), rec);
        }
        Ok(Self {
            kind,
            dim: dim.unwrap_or(0),
            records,
        })
    }

    pub fn get(&self, id: &str) -> Option<&[f32]> {
        self.records.get(id).map(|r| r.vector.as_slice())
    }

    pub fn require(&self, id: &str) -> Result<&[f32], ScoreError> {
        self.get(id).ok_or_else(|| ScoreError::MissingEmbedding {
            item_id: id.to_string(),
            kind: self.kind,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Attention stacks keyed by description id. Entries of shape `[L, H, 0, 0]`
/// mark texts that were empty after stop-word removal and are listed in
/// `skipped`.
#[derive(Debug, Clone, Default)]
pub struct AttentionSet {
    stacks: BTreeMap<String, AttentionStack>,
    pub skipped: Vec<String>,
}

impl AttentionSet {
    pub fn from_containers<'a>(
        containers: impl IntoIterator<Item = &'a TensorContainer>,
    ) -> Result<Self, ScoreError> {
        let mut set = AttentionSet::default();
        for c in containers {
            for (name, t) in &c.entries {
                if set.stacks.contains_key(name) || set.skipped.contains(name) {
                    return Err(ScoreError::DuplicateAttention(name.clone()));
                }
                if is_empty_sentinel(&t.shape) {
                    set.skipped.push(name.clone());
                    continue;
                }
                let stack = AttentionStack::new(name.as_str(), &t.shape, t.data.clone())?;
                set.stacks.insert(name.clone(), stack);
            }
        }
        set.skipped.sort();
        Ok(set)
    }

    pub fn get(&self, id: &str) -> Option<&AttentionStack> {
        self.stacks.get(id)
    }

    pub fn len(&self) -> usize {
        self.stacks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stacks.is_empty()
    }
}

pub(crate) fn is_empty_sentinel(shape: &[usize]) -> bool {
    matches!(shape, [_, _, 0, 0])
}

#[derive(Debug, Clone)]
pub struct ScoreConfig {
    pub scale: f64,
    pub modes: ContextModes,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            scale: 1.0,
            modes: ContextModes::BOTH,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScoreRun {
    pub results: Vec<MetricResult>,
    /// Descriptions left without a SPURTS score although attention was given.
    pub notes: Vec<String>,
}

fn check_dims(sets: &[&EmbeddingSet]) -> Result<(), ScoreError> {
    let Some(first) = sets.iter().find(|s| !s.is_empty()) else {
        return Ok(());
    };
    for s in sets {
        if !s.is_empty() && s.dim != first.dim {
            let (item_id, _) = s.records.iter().next().expect("non-empty");
            return Err(ScoreError::ModelMismatch {
                item_id: item_id.clone(),
                kind: s.kind,
                expected: first.dim,
                found: s.dim,
            });
        }
    }
    Ok(())
}

/// Scores every item in corpus order. Descriptions are scored in parallel.
pub fn score_corpus(
    items: &[CorpusItem],
    images: &EmbeddingSet,
    descriptions: &EmbeddingSet,
    contexts: Option<&EmbeddingSet>,
    attention: Option<&AttentionSet>,
    config: &ScoreConfig,
) -> Result<ScoreRun, ScoreError> {
    let mut sets = vec![images, descriptions];
    sets.extend(contexts);
    check_dims(&sets)?;

    let mut notes = Vec::new();
    let mut inputs = Vec::with_capacity(items.len());
    for item in items {
        let stack = attention.and_then(|a| a.get(&item.description_id));
        if let (Some(a), None) = (attention, stack) {
            let why = if a.skipped.contains(&item.description_id) {
                "empty after stop-word removal"
            } else {
                "no attention entry"
            };
            notes.push(format!("{}: spurts left empty ({why})", item.description_id));
        }
        inputs.push((
            item.description_id.as_str(),
            ScoreInputs {
                image: images.require(&item.image_id)?,
                description: descriptions.require(&item.description_id)?,
                context: contexts.map(|c| c.require(&item.context_id)).transpose()?,
                attention: stack,
            },
        ));
    }

    let results = inputs
        .par_iter()
        .map(|(id, input)| {
            score_description(id, *input, config.scale, config.modes).map_err(|source| {
                ScoreError::Metric {
                    description_id: id.to_string(),
                    source,
                }
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScoreRun { results, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(kind: EmbeddingKind, entries: &[(&str, Vec<f32>)]) -> EmbeddingSet {
        let mut c = TensorContainer::new();
        for (n, v) in entries {
            c.insert(*n, vec![v.len()], v.clone()).unwrap();
        }
        EmbeddingSet::from_container(&c, kind, "test").unwrap()
    }

    fn item() -> Vec<CorpusItem> {
        vec![CorpusItem::new("d1", "i1", "c1", "a red gazebo").unwrap()]
    }

    #[test]
    fn full_inputs() {
        let images = set(EmbeddingKind::Image, &[("i1", vec![1.0, 0.0])]);
        let descs = set(EmbeddingKind::Description, &[("d1", vec![1.0, 1.0])]);
        let ctxs = set(EmbeddingKind::Context, &[("c1", vec![0.0, 1.0])]);
        let mut att = TensorContainer::new();
        att.insert("d1", vec![1, 1, 2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let att = AttentionSet::from_containers([&att]).unwrap();
        let run = score_corpus(&item(), &images, &descs, Some(&ctxs), Some(&att), &ScoreConfig::default()).unwrap();
        let r = &run.results[0];
        assert!(r.contextual_clipscore.is_some() && r.contextual_clipscore_normalized.is_some());
        assert!((r.spurts.unwrap() - 1.0).abs() < 1e-12);
        assert!(run.notes.is_empty());
    }

    #[test]
    fn missing_and_mismatched() {
        let images = set(EmbeddingKind::Image, &[("i2", vec![1.0, 0.0])]);
        let descs = set(EmbeddingKind::Description, &[("d1", vec![1.0, 1.0])]);
        assert!(matches!(
            score_corpus(&item(), &images, &descs, None, None, &ScoreConfig::default()),
            Err(ScoreError::MissingEmbedding { kind: EmbeddingKind::Image, .. })
        ));
        let images = set(EmbeddingKind::Image, &[("i1", vec![1.0; 512])]);
        let descs = set(EmbeddingKind::Description, &[("d1", vec![1.0; 768])]);
        assert!(matches!(
            score_corpus(&item(), &images, &descs, None, None, &ScoreConfig::default()),
            Err(ScoreError::ModelMismatch { expected: 512, found: 768, .. })
        ));
        let mut c = TensorContainer::new();
        c.insert("a", vec![2], vec![1.0, 0.0]).unwrap();
        c.insert("b", vec![3], vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            EmbeddingSet::from_container(&c, EmbeddingKind::Image, "m"),
            Err(ScoreError::ModelMismatch { .. })
        ));
    }

    #[test]
    fn empty_sentinel_is_noted() {
        let images = set(EmbeddingKind::Image, &[("i1", vec![1.0, 0.0])]);
        let descs = set(EmbeddingKind::Description, &[("d1", vec![1.0, 1.0])]);
        let mut att = TensorContainer::new();
        att.insert("d1", vec![2, 2, 0, 0], vec![]).unwrap();
        let att = AttentionSet::from_containers([&att]).unwrap();
        assert_eq!(att.skipped, vec!["d1".to_string()]);
        let run = score_corpus(&item(), &images, &descs, None, Some(&att), &ScoreConfig::default()).unwrap();
        assert_eq!(run.results[0].spurts, None);
        assert_eq!(run.notes.len(), 1);
    }
}
