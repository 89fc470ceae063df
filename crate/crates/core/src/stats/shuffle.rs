//! Shuffled-pair compatibility test.
//!
//! Every description is scored against its own image and against an image
//! drawn by a seeded random derangement, then the condition (shuffled = 0,
//! ordered = 1) is regressed on the scores.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{mean, ols, StatsError};
use crate::corpus::CorpusItem;

/// Upper bound on rejection-sampling rounds before giving up.
pub const MAX_DERANGEMENT_ATTEMPTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ShuffleTestResult {
    pub ordered_mean: f64,
    pub shuffled_mean: f64,
    /// Slope on the ordered-condition indicator.
    pub regression_beta: f64,
    pub regression_se: f64,
    pub p_value: f64,
    pub seed: u64,
    pub n_pairs: usize,
    /// `assignment[i]` is the item whose image description `i` was paired
    /// with in the shuffled condition.
    pub assignment: Vec<usize>,
}

/// Seeded uniform permutation `π` of item indices such that no item receives
/// an image equal to its own (`image_ids[π(i)] != image_ids[i]`).
///
/// Rejection-samples uniform permutations. Fails if fewer than two distinct
/// images exist, if some image accounts for more than half the items (no
/// valid assignment exists), or if the attempt budget runs out.
pub fn derangement(image_ids: &[&str], seed: u64) -> Result<Vec<usize>, StatsError> {
    let n = image_ids.len();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for id in image_ids {
        *counts.entry(id).or_default() += 1;
    }
    if counts.len() < 2 {
        return Err(StatsError::CannotDerange(format!(
            "need at least 2 distinct images, found {}",
            counts.len()
        )));
    }
    if let Some((id, &c)) = counts.iter().find(|(_, &c)| 2 * c > n) {
        return Err(StatsError::CannotDerange(format!(
            "image `{id}` is paired with {c} of {n} descriptions"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..MAX_DERANGEMENT_ATTEMPTS {
        perm.shuffle(&mut rng);
        if perm
            .iter()
            .enumerate()
            .all(|(i, &j)| image_ids[i] != image_ids[j])
        {
            return Ok(perm);
        }
    }
    Err(StatsError::CannotDerange(format!(
        "no valid assignment after {MAX_DERANGEMENT_ATTEMPTS} attempts"
    )))
}

/// Runs the compatibility test with `score(image_id, description_id)`.
pub fn shuffle_test<F>(
    mut score: F,
    corpus: &[CorpusItem],
    seed: u64,
) -> Result<ShuffleTestResult, StatsError>
where
    F: FnMut(&str, &str) -> f64,
{
    let images: Vec<&str> = corpus.iter().map(|i| i.image_id.as_str()).collect();
    let assignment = derangement(&images, seed)?;
    let ordered: Vec<f64> = corpus
        .iter()
        .map(|i| score(&i.image_id, &i.description_id))
        .collect();
    let shuffled: Vec<f64> = corpus
        .iter()
        .zip(&assignment)
        .map(|(i, &j)| score(images[j], &i.description_id))
        .collect();

    let condition: Vec<f64> = shuffled
        .iter()
        .map(|_| 0.0)
        .chain(ordered.iter().map(|_| 1.0))
        .collect();
    let y: Vec<f64> = shuffled.iter().chain(&ordered).copied().collect();
    let fit = ols(&[&condition], &y, true)?;

    Ok(ShuffleTestResult {
        ordered_mean: mean(&ordered),
        shuffled_mean: mean(&shuffled),
        regression_beta: fit.coefficients[1],
        regression_se: fit.standard_errors[1],
        p_value: fit.p_values[1],
        seed,
        n_pairs: corpus.len(),
        assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn corpus(images: &[&str]) -> Vec<CorpusItem> {
        images
            .iter()
            .enumerate()
            .map(|(k, img)| CorpusItem::new(format!("d{k}"), *img, "c", "text").unwrap())
            .collect()
    }

    #[test]
    fn constant_scores() {
        let c = corpus(&["a", "b", "c", "d"]);
        let r = shuffle_test(|_, _| 0.3, &c, 1).unwrap();
        assert!((r.ordered_mean - 0.3).abs() < 1e-15);
        assert!((r.shuffled_mean - 0.3).abs() < 1e-15);
        assert!(r.regression_beta.abs() < 1e-12);
    }

    #[test]
    fn indicator_scores() {
        let c = corpus(&["a", "a", "b", "b", "c", "d"]);
        let truth: BTreeMap<_, _> = c
            .iter()
            .map(|i| (i.description_id.clone(), i.image_id.clone()))
            .collect();
        let r = shuffle_test(
            |img, d| if truth[d] == img { 1.0 } else { 0.0 },
            &c,
            42,
        )
        .unwrap();
        assert_eq!(r.ordered_mean, 1.0);
        assert_eq!(r.shuffled_mean, 0.0);
        assert!((r.regression_beta - 1.0).abs() < 1e-12);
        assert!(r.p_value < 1e-3);
    }

    #[test]
    fn two_items_swap() {
        for seed in 0..20 {
            assert_eq!(derangement(&["x", "y"], seed).unwrap(), vec![1, 0]);
        }
    }

    #[test]
    fn infeasible_assignments() {
        assert!(matches!(
            derangement(&["x", "x", "x"], 0),
            Err(StatsError::CannotDerange(_))
        ));
        assert!(matches!(
            derangement(&["x", "x", "y"], 0),
            Err(StatsError::CannotDerange(_))
        ));
        assert!(matches!(derangement(&[], 0), Err(StatsError::CannotDerange(_))));
        let c = corpus(&["only"]);
        assert!(matches!(
            shuffle_test(|_, _| 1.0, &c, 0),
            Err(StatsError::CannotDerange(_))
        ));
    }

    #[test]
    fn seeded_determinism() {
        let ids: Vec<_> = (0..30).map(|i| (i % 7).to_string()).collect();
        let refs: Vec<&str> = ids.iter().map(|s| s.as_str()).collect();
        assert_eq!(derangement(&refs, 9).unwrap(), derangement(&refs, 9).unwrap());
        assert_ne!(derangement(&refs, 9).unwrap(), derangement(&refs, 10).unwrap());
    }
}
