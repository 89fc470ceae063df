//! Metric kernels and statistics for referenceless image description scoring.
//!
//! This crate is `no_std` (it needs `alloc`) and carries no IO. It provides:
//!
//! - [`corpus`]: the in-memory data model (descriptions, Likert ratings,
//!   embeddings and attention stacks) with invariant checks.
//! - [`metrics`]: CLIPScore, the context-aware CLIPScore variant, and the
//!   attention-based SPURTS fluency score with its NMI primitives.
//! - [`stats`]: rating aggregation, Pearson correlation, OLS regression,
//!   explained-variance decomposition and the shuffled-pair compatibility test.
//!
//! File formats, CSV ingestion and the command line live in the `ctxscore`
//! crate.

#![no_std]

extern crate alloc;

pub mod corpus;
pub mod metrics;
pub mod stats;

pub use corpus::{
    AttentionStack, CorpusError, CorpusItem, Dimension, EmbeddingKind, EmbeddingRecord, Group,
    RatingRecord,
};
pub use metrics::{ContextMode, MetricError, MetricResult, StopwordList};
pub use stats::{
    AggregatedRating, CorrelationResult, RegressionResult, ShuffleTestResult, StatsError,
};
