//! The `ctxscore` command line.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctxscore_core::corpus::{Dimension, EmbeddingKind, Group};
use ctxscore_core::metrics::{ContextModes, StopwordList, ENGLISH_STOPWORDS_VERSION};

use crate::analyze::{analyze, AnalysisInputs, AnalyzeConfig, AnalyzeError, FileDigest, Provenance};
use crate::container::{ContainerError, TensorContainer};
use crate::output::{sha256_hex, write_atomic};
use crate::render::{panel_csv, panel_svg, report_text};
use crate::score::{score_corpus, AttentionSet, EmbeddingSet, ScoreConfig, ScoreError};
use crate::shuffle::{run_shuffle, ShuffleError, ShuffleReport};
use crate::tables::{display_name, load_corpus, load_items, load_scores, write_scores, TableError};
use crate::validate::{validate_file, FileKind};

#[derive(Debug, Parser)]
#[command(name = "ctxscore", version, about = "Reference-free scoring of image descriptions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute metric scores for every description.
    Score(ScoreArgs),
    /// Correlate scores with ratings and write a report.
    Analyze(AnalyzeArgs),
    /// Run the shuffled-pair compatibility test.
    Shuffle(ShuffleArgs),
    /// Check input files and report violations.
    Validate(ValidateArgs),
    /// Write the stop-word list used for attention inputs.
    Stopwords(StopwordsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ContextModeArg {
    Literal,
    Normalized,
    Both,
}

impl From<ContextModeArg> for ContextModes {
    fn from(m: ContextModeArg) -> Self {
        ContextModes {
            literal: m != ContextModeArg::Normalized,
            normalized: m != ContextModeArg::Literal,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub items: PathBuf,
    /// Container of image embeddings keyed by image_id.
    #[arg(long)]
    pub images: PathBuf,
    /// Container of description embeddings keyed by description_id.
    #[arg(long)]
    pub descriptions: PathBuf,
    /// Container of context embeddings keyed by context_id.
    #[arg(long)]
    pub contexts: Option<PathBuf>,
    /// Container(s) of attention stacks keyed by description_id.
    #[arg(long)]
    pub attention: Vec<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, value_enum, default_value_t = ContextModeArg::Both)]
    pub context_mode: ContextModeArg,
    #[arg(long, default_value = "unspecified")]
    pub model_id: String,
    #[arg(long, default_value = "scores.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub ratings: PathBuf,
    #[arg(long)]
    pub items: PathBuf,
    /// JSON written by `ctxscore shuffle`, embedded in the report.
    #[arg(long)]
    pub shuffle_result: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub groups: Vec<Group>,
    #[arg(long, value_delimiter = ',')]
    pub dimensions: Vec<Dimension>,
    /// Center predictors before the variance decomposition.
    #[arg(long)]
    pub center: bool,
    #[arg(long)]
    pub emit_svg: bool,
    #[arg(long, default_value = "report")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ShuffleArgs {
    #[arg(long)]
    pub items: PathBuf,
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long)]
    pub descriptions: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = String::from("unspecified"))]
    pub model_id: String,
    #[arg(long, default_value = "shuffle.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Items file used to check references in ratings files.
    #[arg(long)]
    pub items: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FileKind::Auto)]
    pub kind: FileKind,
}

#[derive(Debug, Args)]
pub struct StopwordsArgs {
    /// Destination file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("{file}: {source}")]
    Container { file: String, source: ContainerError },
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Analyze(#[from] AnalyzeError),
    #[error(transparent)]
    Shuffle(#[from] ShuffleError),
    #[error("{file}: {source}")]
    Json { file: String, source: serde_json::Error },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("--scale must be a positive finite number, got {0}")]
    InvalidScale(f64),
    #[error("{0} file(s) failed validation")]
    ValidationFailed(usize),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(io_err(path))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes).map_err(io_err(path))
}

fn read_container(path: &Path) -> Result<TensorContainer, CliError> {
    TensorContainer::from_bytes(&read(path)?).map_err(|source| CliError::Container {
        file: display_name(path),
        source,
    })
}

fn embeddings(path: &Path, kind: EmbeddingKind, model_id: &str) -> Result<EmbeddingSet, CliError> {
    Ok(EmbeddingSet::from_container(&read_container(path)?, kind, model_id)?)
}

fn check_scale(scale: f64) -> Result<(), CliError> {
    if scale.is_finite() && scale > 0.0 {
        Ok(())
    } else {
        Err(CliError::InvalidScale(scale))
    }
}

fn digest(path: &Path) -> Result<FileDigest, CliError> {
    Ok(FileDigest {
        file_name: display_name(path),
        sha256: sha256_hex(&read(path)?),
    })
}

fn cmd_score(args: &ScoreArgs, log: &mut dyn Write) -> Result<(), CliError> {
    check_scale(args.scale)?;
    let items = load_items(&args.items)?;
    let images = embeddings(&args.images, EmbeddingKind::Image, &args.model_id)?;
    let descriptions = embeddings(&args.descriptions, EmbeddingKind::Description, &args.model_id)?;
    let contexts = args
        .contexts
        .as_deref()
        .map(|p| embeddings(p, EmbeddingKind::Context, &args.model_id))
        .transpose()?;
    let attention = if args.attention.is_empty() {
        None
    } else {
        let containers = args
            .attention
            .iter()
            .map(|p| read_container(p))
            .collect::<Result<Vec<_>, _>>()?;
        Some(AttentionSet::from_containers(&containers)?)
    };
    let config = ScoreConfig {
        scale: args.scale,
        modes: args.context_mode.into(),
    };
    let run = score_corpus(
        &items,
        &images,
        &descriptions,
        contexts.as_ref(),
        attention.as_ref(),
        &config,
    )?;
    for note in &run.notes {
        let _ = writeln!(log, "note: {note}");
    }
    write(&args.out, &write_scores(&run.results))?;
    let _ = writeln!(log, "scored {} descriptions → {}", run.results.len(), args.out.display());
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs, log: &mut dyn Write) -> Result<(), CliError> {
    let (items, ratings) = load_corpus(&args.items, &args.ratings)?;
    let scores = load_scores(&args.scores)?;
    let shuffle: Option<ShuffleReport> = match &args.shuffle_result {
        Some(p) => Some(serde_json::from_slice(&read(p)?).map_err(|source| CliError::Json {
            file: display_name(p),
            source,
        })?),
        None => None,
    };

    let mut inputs = BTreeMap::new();
    inputs.insert("items".to_string(), digest(&args.items)?);
    inputs.insert("ratings".to_string(), digest(&args.ratings)?);
    inputs.insert("scores".to_string(), digest(&args.scores)?);
    if let Some(p) = &args.shuffle_result {
        inputs.insert("shuffle".to_string(), digest(p)?);
    }
    let mut context_modes = Vec::new();
    if scores.iter().any(|s| s.contextual_clipscore.is_some()) {
        context_modes.push("literal".to_string());
    }
    if scores.iter().any(|s| s.contextual_clipscore_normalized.is_some()) {
        context_modes.push("normalized".to_string());
    }
    let provenance = Provenance {
        inputs,
        seeds: Vec::new(),
        metrics: Vec::new(),
        context_modes,
        stopword_list_version: ENGLISH_STOPWORDS_VERSION.to_string(),
        groups: Vec::new(),
        dimensions: Vec::new(),
        center_predictors: args.center,
    };
    let mut config = AnalyzeConfig {
        center_predictors: args.center,
        ..AnalyzeConfig::default()
    };
    if !args.groups.is_empty() {
        config.groups = args.groups.clone();
    }
    if !args.dimensions.is_empty() {
        config.dimensions = args.dimensions.clone();
    }

    let (report, panels) = analyze(
        AnalysisInputs {
            items: &items,
            ratings: &ratings,
            scores: &scores,
            shuffle,
            provenance,
        },
        &config,
    )?;

    let plots = args.out_dir.join("plots");
    std::fs::create_dir_all(&plots).map_err(io_err(&plots))?;
    let mut json = serde_json::to_vec_pretty(&report).expect("report serializes");
    json.push(b'\n');
    write(&args.out_dir.join("report.json"), &json)?;
    write(&args.out_dir.join("report.txt"), report_text(&report).as_bytes())?;
    for panel in &panels {
        write(&plots.join(format!("{}.csv", panel.name)), &panel_csv(panel))?;
        if args.emit_svg {
            write(&plots.join(format!("{}.svg", panel.name)), panel_svg(panel).as_bytes())?;
        }
    }
    let _ = writeln!(
        log,
        "wrote report and {} plot panels → {}",
        panels.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_shuffle(args: &ShuffleArgs, log: &mut dyn Write) -> Result<(), CliError> {
    check_scale(args.scale)?;
    let items = load_items(&args.items)?;
    let images = embeddings(&args.images, EmbeddingKind::Image, &args.model_id)?;
    let descriptions = embeddings(&args.descriptions, EmbeddingKind::Description, &args.model_id)?;
    let report = run_shuffle(&items, &images, &descriptions, args.seed, args.scale)?;
    let mut json = serde_json::to_vec_pretty(&report).expect("report serializes");
    json.push(b'\n');
    write(&args.out, &json)?;
    let _ = writeln!(
        log,
        "shuffle test: β={:.4} p={:.3e} {} → {}",
        report.regression_beta,
        report.p_value,
        report.stars,
        args.out.display()
    );
    Ok(())
}

fn cmd_validate(args: &ValidateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let items = args.items.as_deref().map(load_items).transpose()?;
    let mut failed = 0;
    for file in &args.files {
        let report = validate_file(file, args.kind, items.as_deref());
        if !report.ok() {
            failed += 1;
        }
        let _ = write!(out, "{report}");
    }
    if failed > 0 {
        Err(CliError::ValidationFailed(failed))
    } else {
        Ok(())
    }
}

fn cmd_stopwords(args: &StopwordsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = StopwordList::english().to_text();
    match &args.out {
        Some(path) => write(path, text.as_bytes()),
        None => out.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>"))),
    }
}

/// Runs one command. Results go to `out`, progress and notes to `log`.
pub fn run(cli: &Cli, out: &mut dyn Write, log: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Score(a) => cmd_score(a, log),
        Command::Analyze(a) => cmd_analyze(a, log),
        Command::Shuffle(a) => cmd_shuffle(a, log),
        Command::Validate(a) => cmd_validate(a, out),
        Command::Stopwords(a) => cmd_stopwords(a, out),
    }
}
