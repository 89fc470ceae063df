//! Correlation, regression and variance analyses of metric scores against
//! human ratings.
//!
//! Mixed-effects models with random rater and description intercepts are
//! approximated by OLS on per-description mean ratings; every regression in
//! the report is labelled accordingly.

use std::collections::{BTreeMap, BTreeSet};

use ctxscore_core::corpus::{CorpusItem, Dimension, Group, RatingRecord};
use ctxscore_core::metrics::MetricResult;
use ctxscore_core::stats::{
    aggregate_ratings, center, ols, pearson, rescale_unit, significance_stars, standardize,
    variance_decomposition, CorrelationResult, RegressionResult, StatsError,
};
use serde::{Deserialize, Serialize};

use crate::shuffle::ShuffleReport;

pub const REPORT_VERSION: u32 = 1;
pub const OLS_NOTE: &str =
    "regressions are OLS fits on per-description mean ratings, approximating mixed-effects models with random rater and description intercepts";

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error("{source_name} references unknown description `{description_id}`")]
    DanglingReference {
        source_name: &'static str,
        description_id: String,
    },
}

/// Metric columns of `scores.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    Clipscore,
    ContextualClipscore,
    ContextualClipscoreNormalized,
    Spurts,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::Clipscore,
        Metric::ContextualClipscore,
        Metric::ContextualClipscoreNormalized,
        Metric::Spurts,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Clipscore => "clipscore",
            Metric::ContextualClipscore => "contextual_clipscore",
            Metric::ContextualClipscoreNormalized => "contextual_clipscore_normalized",
            Metric::Spurts => "spurts",
        }
    }

    pub fn value(self, r: &MetricResult) -> Option<f64> {
        match self {
            Metric::Clipscore => Some(r.clipscore),
            Metric::ContextualClipscore => r.contextual_clipscore,
            Metric::ContextualClipscoreNormalized => r.contextual_clipscore_normalized,
            Metric::Spurts => r.spurts,
        }
    }
}

/// One correlation cell. Failures are recorded, not fatal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Cell {
    Ok {
        r: f64,
        p_value: f64,
        n: usize,
        stars: String,
    },
    Error {
        error: String,
        n: usize,
    },
}

impl Cell {
    fn from_result(result: Result<CorrelationResult, StatsError>, n: usize) -> Self {
        match result {
            Ok(c) => Cell::Ok {
                r: c.r,
                p_value: c.p_value,
                n: c.n,
                stars: significance_stars(c.p_value).to_string(),
            },
            Err(e) => Cell::Error {
                error: error_name(&e).to_string(),
                n,
            },
        }
    }

    pub fn r(&self) -> Option<f64> {
        match self {
            Cell::Ok { r, .. } => Some(*r),
            Cell::Error { .. } => None,
        }
    }
}

fn error_name(e: &StatsError) -> &'static str {
    match e {
        StatsError::NoData => "NoData",
        StatsError::InsufficientData { .. } => "InsufficientData",
        StatsError::DegenerateVariance => "DegenerateVariance",
        StatsError::SingularDesign => "SingularDesign",
        StatsError::CannotDerange(_) => "CannotDerange",
        StatsError::LengthMismatch { .. } => "LengthMismatch",
        StatsError::NonFinite => "NonFinite",
        StatsError::UnknownDescription(_) => "UnknownDescription",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub beta: f64,
    pub se: f64,
    pub p_value: f64,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Regression {
    Ok {
        response: String,
        terms: Vec<Term>,
        r_squared: f64,
        n: usize,
        df_residual: usize,
    },
    Error {
        response: String,
        error: String,
        n: usize,
    },
}

impl Regression {
    fn build(
        response: &str,
        names: &[&str],
        result: Result<RegressionResult, StatsError>,
        n: usize,
    ) -> Self {
        match result {
            Ok(fit) => {
                let terms = std::iter::once("(intercept)")
                    .chain(names.iter().copied())
                    .zip(fit.coefficients.iter().zip(&fit.standard_errors).zip(&fit.p_values))
                    .map(|(name, ((&beta, &se), &p))| Term {
                        name: name.to_string(),
                        beta,
                        se,
                        p_value: p,
                        stars: significance_stars(p).to_string(),
                    })
                    .collect();
                Regression::Ok {
                    response: response.to_string(),
                    terms,
                    r_squared: fit.r_squared,
                    n: fit.n,
                    df_residual: fit.df_residual,
                }
            }
            Err(e) => Regression::Error {
                response: response.to_string(),
                error: error_name(&e).to_string(),
                n,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum VarianceEntry {
    Ok {
        /// R² keyed by `length`, the metric name, and `length+<metric>`.
        r_squared: BTreeMap<String, f64>,
        joint_regression: Regression,
        n: usize,
    },
    Error {
        error: String,
        n: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub file_name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub inputs: BTreeMap<String, FileDigest>,
    pub seeds: Vec<u64>,
    pub metrics: Vec<String>,
    pub context_modes: Vec<String>,
    pub stopword_list_version: String,
    pub groups: Vec<String>,
    pub dimensions: Vec<String>,
    pub center_predictors: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthCorrelations {
    /// group → dimension → cell
    pub ratings: BTreeMap<String, BTreeMap<String, Cell>>,
    /// metric → cell
    pub metrics: BTreeMap<String, Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub report_version: u32,
    pub notes: Vec<String>,
    pub provenance: Provenance,
    /// metric → group → dimension → cell. Dimensions a group was never asked
    /// are absent.
    pub correlations: BTreeMap<String, BTreeMap<String, BTreeMap<String, Cell>>>,
    /// dimension → `<group>~<group>` → cell
    pub group_agreement: BTreeMap<String, BTreeMap<String, Cell>>,
    pub length_correlations: LengthCorrelations,
    /// metric → group → decomposition of the overall rating
    pub variance_decomposition: BTreeMap<String, BTreeMap<String, VarianceEntry>>,
    /// rater population → overall rating regressed on the content questions
    pub content_regressions: BTreeMap<String, Regression>,
    pub shuffle_test: Option<ShuffleReport>,
}

/// Scatter data behind one report cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotPanel {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64, String)>,
}

#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    pub groups: Vec<Group>,
    pub dimensions: Vec<Dimension>,
    pub center_predictors: bool,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self {
            groups: Group::ALL.to_vec(),
            dimensions: Dimension::ALL.to_vec(),
            center_predictors: false,
        }
    }
}

pub struct AnalysisInputs<'a> {
    pub items: &'a [CorpusItem],
    pub ratings: &'a [RatingRecord],
    pub scores: &'a [MetricResult],
    pub shuffle: Option<ShuffleReport>,
    pub provenance: Provenance,
}

type Series = BTreeMap<String, f64>;

fn join(a: &Series, b: &Series) -> (Vec<f64>, Vec<f64>, Vec<String>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ids = Vec::new();
    for (id, x) in a {
        if let Some(y) = b.get(id) {
            xs.push(*x);
            ys.push(*y);
            ids.push(id.clone());
        }
    }
    (xs, ys, ids)
}

fn correlate(
    a: &Series,
    b: &Series,
    panel: (&str, &str, &str),
    panels: &mut Vec<PlotPanel>,
) -> Cell {
    let (xs, ys, ids) = join(a, b);
    let cell = Cell::from_result(pearson(&xs, &ys), xs.len());
    panels.push(PlotPanel {
        name: panel.0.to_string(),
        x_label: panel.1.to_string(),
        y_label: panel.2.to_string(),
        points: xs.into_iter().zip(ys).zip(ids).map(|((x, y), id)| (x, y, id)).collect(),
    });
    cell
}

/// Rescaled per-description mean ratings.
fn rating_series(ratings: &[RatingRecord], groups: &[Group], dimension: Dimension) -> Series {
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for g in groups {
        // Pooling across groups weights every judgment equally.
        for r in ratings.iter().filter(|r| r.group == *g && r.dimension == dimension) {
            let e = sums.entry(r.description_id.clone()).or_default();
            e.0 += f64::from(r.value);
            e.1 += 1;
        }
    }
    sums.into_iter()
        .map(|(id, (s, n))| (id, (s / n as f64 - 1.0) / 4.0))
        .collect()
}

fn single_group_series(ratings: &[RatingRecord], group: Group, dimension: Dimension) -> Series {
    match aggregate_ratings(ratings, group, dimension) {
        Ok(agg) => agg.into_iter().map(|a| (a.description_id, a.rescaled)).collect(),
        Err(_) => Series::new(),
    }
}

fn content_regression(
    ratings: &[RatingRecord],
    groups: &[Group],
    predictors: &[Dimension],
) -> Regression {
    let overall = rating_series(ratings, groups, Dimension::Overall);
    let series: Vec<Series> = predictors
        .iter()
        .map(|d| rating_series(ratings, groups, *d))
        .collect();
    let ids: Vec<&String> = overall
        .keys()
        .filter(|id| series.iter().all(|s| s.contains_key(*id)))
        .collect();
    let y: Vec<f64> = ids.iter().map(|id| overall[*id]).collect();
    let columns: Vec<Vec<f64>> = series
        .iter()
        .map(|s| standardize(&ids.iter().map(|id| s[*id]).collect::<Vec<_>>()))
        .collect();
    let refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    let names: Vec<&str> = predictors.iter().map(|d| d.as_str()).collect();
    Regression::build("overall", &names, ols(&refs, &y, true), y.len())
}

fn decompose(
    items: &BTreeMap<&str, usize>,
    metric_name: &str,
    metric: &Series,
    rating: &Series,
    center_predictors: bool,
) -> VarianceEntry {
    let ids: Vec<&String> = rating
        .keys()
        .filter(|id| metric.contains_key(*id) && items.contains_key(id.as_str()))
        .collect();
    let n = ids.len();
    let y: Vec<f64> = ids.iter().map(|id| rating[*id]).collect();
    let lengths: Vec<f64> = ids.iter().map(|id| items[id.as_str()] as f64).collect();
    let mut length = rescale_unit(&lengths);
    let mut score: Vec<f64> = ids.iter().map(|id| metric[*id]).collect();
    if center_predictors {
        length = center(&length);
        score = center(&score);
    }
    match variance_decomposition(&[("length", &length), (metric_name, &score)], &y) {
        Ok(r_squared) => VarianceEntry::Ok {
            r_squared,
            joint_regression: Regression::build(
                "overall",
                &["length", metric_name],
                ols(&[&length, &score], &y, true),
                n,
            ),
            n,
        },
        Err(e) => VarianceEntry::Error {
            error: error_name(&e).to_string(),
            n,
        },
    }
}

/// Runs every analysis; returns the report and the scatter panels behind it.
pub fn analyze(
    inputs: AnalysisInputs<'_>,
    config: &AnalyzeConfig,
) -> Result<(AnalysisReport, Vec<PlotPanel>), AnalyzeError> {
    let known: BTreeSet<&str> = inputs.items.iter().map(|i| i.description_id.as_str()).collect();
    for r in inputs.scores {
        if !known.contains(r.description_id.as_str()) {
            return Err(AnalyzeError::DanglingReference {
                source_name: "scores",
                description_id: r.description_id.clone(),
            });
        }
    }
    for r in inputs.ratings {
        if !known.contains(r.description_id.as_str()) {
            return Err(AnalyzeError::DanglingReference {
                source_name: "ratings",
                description_id: r.description_id.clone(),
            });
        }
    }

    let mut panels = Vec::new();
    let lengths: BTreeMap<&str, usize> = inputs
        .items
        .iter()
        .map(|i| (i.description_id.as_str(), i.length_chars))
        .collect();
    let length_series: Series = lengths.iter().map(|(k, v)| (k.to_string(), *v as f64)).collect();

    let metrics: Vec<(Metric, Series)> = Metric::ALL
        .into_iter()
        .filter_map(|m| {
            let s: Series = inputs
                .scores
                .iter()
                .filter_map(|r| m.value(r).map(|v| (r.description_id.clone(), v)))
                .collect();
            (!s.is_empty()).then_some((m, s))
        })
        .collect();

    let cells: Vec<(Group, Dimension)> = config
        .groups
        .iter()
        .flat_map(|g| config.dimensions.iter().map(move |d| (*g, *d)))
        .filter(|(g, d)| g.measures(*d))
        .collect();
    let ratings: BTreeMap<(Group, Dimension), Series> = cells
        .iter()
        .map(|&(g, d)| ((g, d), single_group_series(inputs.ratings, g, d)))
        .collect();

    let mut correlations = BTreeMap::new();
    for (metric, series) in &metrics {
        let mut by_group: BTreeMap<String, BTreeMap<String, Cell>> = BTreeMap::new();
        for &(g, d) in &cells {
            let name = format!("{}__{}__{}", metric.as_str(), g, d);
            let cell = correlate(
                series,
                &ratings[&(g, d)],
                (&name, metric.as_str(), &format!("{g} {d} (rescaled)")),
                &mut panels,
            );
            by_group
                .entry(g.to_string())
                .or_default()
                .insert(d.to_string(), cell);
        }
        correlations.insert(metric.as_str().to_string(), by_group);
    }

    let mut group_agreement: BTreeMap<String, BTreeMap<String, Cell>> = BTreeMap::new();
    for &d in &config.dimensions {
        for (i, &a) in config.groups.iter().enumerate() {
            for &b in &config.groups[i + 1..] {
                if !(a.measures(d) && b.measures(d)) {
                    continue;
                }
                let key = format!("{a}~{b}");
                let name = format!("agreement__{d}__{a}__{b}");
                let cell = correlate(
                    &ratings[&(a, d)],
                    &ratings[&(b, d)],
                    (&name, &format!("{a} {d}"), &format!("{b} {d}")),
                    &mut panels,
                );
                group_agreement.entry(d.to_string()).or_default().insert(key, cell);
            }
        }
    }

    let mut length_ratings: BTreeMap<String, BTreeMap<String, Cell>> = BTreeMap::new();
    for &(g, d) in &cells {
        let name = format!("length__{g}__{d}");
        let cell = correlate(
            &length_series,
            &ratings[&(g, d)],
            (&name, "length (characters)", &format!("{g} {d} (rescaled)")),
            &mut panels,
        );
        length_ratings.entry(g.to_string()).or_default().insert(d.to_string(), cell);
    }
    let mut length_metrics = BTreeMap::new();
    for (metric, series) in &metrics {
        let name = format!("length__{}", metric.as_str());
        let cell = correlate(
            &length_series,
            series,
            (&name, "length (characters)", metric.as_str()),
            &mut panels,
        );
        length_metrics.insert(metric.as_str().to_string(), cell);
    }

    let mut variance = BTreeMap::new();
    for (metric, series) in &metrics {
        let mut by_group = BTreeMap::new();
        for &g in &config.groups {
            let overall = single_group_series(inputs.ratings, g, Dimension::Overall);
            by_group.insert(
                g.to_string(),
                decompose(&lengths, metric.as_str(), series, &overall, config.center_predictors),
            );
        }
        variance.insert(metric.as_str().to_string(), by_group);
    }

    let content = [Dimension::Imaginability, Dimension::Relevance, Dimension::Irrelevance];
    let mut content_regressions = BTreeMap::new();
    for &g in &config.groups {
        let predictors: Vec<Dimension> = content.into_iter().filter(|d| g.measures(*d)).collect();
        content_regressions.insert(g.to_string(), content_regression(inputs.ratings, &[g], &predictors));
    }
    let sighted: Vec<Group> = config
        .groups
        .iter()
        .copied()
        .filter(|g| *g != Group::Blv)
        .collect();
    if sighted.len() > 1 {
        content_regressions.insert(
            "sighted_pooled".to_string(),
            content_regression(inputs.ratings, &sighted, &content),
        );
    }

    let mut provenance = inputs.provenance;
    provenance.metrics = metrics.iter().map(|(m, _)| m.as_str().to_string()).collect();
    provenance.groups = config.groups.iter().map(|g| g.to_string()).collect();
    provenance.dimensions = config.dimensions.iter().map(|d| d.to_string()).collect();
    provenance.center_predictors = config.center_predictors;
    if let Some(s) = &inputs.shuffle {
        if !provenance.seeds.contains(&s.seed) {
            provenance.seeds.push(s.seed);
        }
    }

    let report = AnalysisReport {
        report_version: REPORT_VERSION,
        notes: vec![OLS_NOTE.to_string()],
        provenance,
        correlations,
        group_agreement,
        length_correlations: LengthCorrelations {
            ratings: length_ratings,
            metrics: length_metrics,
        },
        variance_decomposition: variance,
        content_regressions,
        shuffle_test: inputs.shuffle,
    };
    Ok((report, panels))
}
