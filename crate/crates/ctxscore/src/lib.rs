//! Scoring and analysis of image descriptions with reference-free metrics.
//!
//! This crate carries the file formats (tensor containers and CSV tables),
//! the analysis report and the `ctxscore` command line on top of
//! [`ctxscore_core`].

pub mod analyze;
pub mod cli;
pub mod container;
pub mod output;
pub mod render;
pub mod score;
pub mod shuffle;
pub mod synthetic;
pub mod tables;
pub mod validate;

pub use ctxscore_core as core;
