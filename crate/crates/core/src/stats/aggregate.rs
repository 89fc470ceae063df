use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::StatsError;
use crate::corpus::{Dimension, Group, RatingRecord};

/// Mean Likert judgment of one description.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedRating {
    pub description_id: String,
    pub group: Group,
    pub dimension: Dimension,
    pub mean_value: f64,
    /// `(mean_value - 1) / 4`, in `[0, 1]`.
    pub rescaled: f64,
    pub n_raters: usize,
}

/// Per-description mean rating for one group and dimension, ordered by
/// description id.
pub fn aggregate_ratings(
    ratings: &[RatingRecord],
    group: Group,
    dimension: Dimension,
) -> Result<Vec<AggregatedRating>, StatsError> {
    let mut sums: BTreeMap<&str, (u64, usize)> = BTreeMap::new();
    for r in ratings
        .iter()
        .filter(|r| r.group == group && r.dimension == dimension)
    {
        let e = sums.entry(r.description_id.as_str()).or_default();
        e.0 += u64::from(r.value);
        e.1 += 1;
    }
    if sums.is_empty() {
        return Err(StatsError::NoData);
    }
    Ok(sums
        .into_iter()
        .map(|(id, (sum, n))| {
            let mean_value = sum as f64 / n as f64;
            AggregatedRating {
                description_id: id.into(),
                group,
                dimension,
                mean_value,
                rescaled: (mean_value - 1.0) / 4.0,
                n_raters: n,
            }
        })
        .collect())
}
