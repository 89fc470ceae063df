//! Invariant checks for any input file, reported per file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use ctxscore_core::corpus::{AttentionStack, CorpusItem, EmbeddingKind, EmbeddingRecord};

use crate::container::{ContainerError, TensorContainer};
use crate::score::is_empty_sentinel;
use crate::tables::{dangling_ratings, display_name, parse_items, parse_ratings, parse_scores, TableError, TableKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FileKind {
    Auto,
    Container,
    Items,
    Ratings,
    Scores,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FileReport {
    pub file: String,
    pub kind: &'static str,
    pub records: usize,
    pub errors: Vec<String>,
    pub notes: Vec<String>,
}

impl FileReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for FileReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            writeln!(f, "{}: ok ({}, {} records)", self.file, self.kind, self.records)?;
        } else {
            writeln!(f, "{}: FAIL ({}, {} errors)", self.file, self.kind, self.errors.len())?;
        }
        for e in &self.errors {
            writeln!(f, "  error: {e}")?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

pub fn container_diagnostic(e: &ContainerError) -> String {
    match e {
        ContainerError::NotAContainer => "NotAContainer: missing CTXM magic".into(),
        ContainerError::UnsupportedVersion(v) => format!("UnsupportedVersion: {v}"),
        ContainerError::CorruptHeader(m) => format!("CorruptHeader: {m}"),
        ContainerError::TruncatedPayload {
            expected,
            actual,
            at_byte,
        } => format!(
            "TruncatedPayload at byte {at_byte}: payload has {actual} of {expected} bytes"
        ),
        ContainerError::DuplicateEntry(n) => format!("DuplicateEntry: `{n}`"),
        ContainerError::ShapeMismatch { name, .. } => format!("ShapeMismatch: `{name}`"),
        ContainerError::Io(e) => format!("Io: {e}"),
    }
}

pub fn table_diagnostic(e: &TableError) -> String {
    match e {
        TableError::SchemaError { row, message, .. } => format!("row {row}: SchemaError: {message}"),
        TableError::RangeError { row, value, .. } => {
            format!("row {row}: RangeError: value {value} outside 1..=5")
        }
        TableError::DanglingReference {
            row, description_id, ..
        } => format!("row {row}: DanglingReference: unknown description `{description_id}`"),
        TableError::Duplicate { row, message, .. } => format!("row {row}: Duplicate: {message}"),
        TableError::Io { source, .. } => format!("Io: {source}"),
    }
}

fn check_container(c: &TensorContainer, report: &mut FileReport) {
    report.records = c.len();
    let mut dims: BTreeMap<usize, &str> = BTreeMap::new();
    for (name, t) in &c.entries {
        match t.shape.len() {
            1 => match EmbeddingRecord::new(name.as_str(), EmbeddingKind::Image, t.data.clone(), "") {
                Ok(rec) => {
                    dims.entry(rec.dim()).or_insert(name);
                }
                Err(e) => report.errors.push(format!("entry `{name}`: {e}")),
            },
            4 if is_empty_sentinel(&t.shape) => report
                .notes
                .push(format!("entry `{name}`: empty text sentinel, skipped when scoring")),
            4 => {
                if let Err(e) = AttentionStack::new(name.as_str(), &t.shape, t.data.clone()) {
                    report.errors.push(format!("entry `{name}`: InvalidAttention: {e}"));
                }
            }
            _ => report.errors.push(format!(
                "entry `{name}`: unsupported shape {:?} (expected [d] or [L, H, T, T])",
                t.shape
            )),
        }
    }
    if dims.len() > 1 {
        let summary: Vec<String> = dims.iter().map(|(d, n)| format!("{d} (e.g. `{n}`)")).collect();
        report
            .errors
            .push(format!("ModelMismatch: embedding dimensions {}", summary.join(", ")));
    }
}

/// Validates one file. `items` enables the dangling-reference check for
/// ratings.
pub fn validate_file(path: &Path, kind: FileKind, items: Option<&[CorpusItem]>) -> FileReport {
    let file = display_name(path);
    let mut report = FileReport {
        file: file.clone(),
        kind: "unknown",
        records: 0,
        errors: Vec::new(),
        notes: Vec::new(),
    };
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => {
            report.errors.push(format!("Io: {e}"));
            return report;
        }
    };
    let kind = match kind {
        FileKind::Auto => {
            let first_line = bytes.split(|b| *b == b'\n').next().unwrap_or_default();
            match TableKind::detect(&String::from_utf8_lossy(first_line)) {
                Some(TableKind::Items) => FileKind::Items,
                Some(TableKind::Ratings) => FileKind::Ratings,
                Some(TableKind::Scores) => FileKind::Scores,
                None => FileKind::Container,
            }
        }
        k => k,
    };
    let table_errors = |report: &mut FileReport, errors: &[TableError], n: usize| {
        report.records = n;
        report.errors.extend(errors.iter().map(table_diagnostic));
    };
    match kind {
        FileKind::Container | FileKind::Auto => {
            report.kind = "container";
            match TensorContainer::from_bytes(&bytes) {
                Ok(c) => check_container(&c, &mut report),
                Err(e) => report.errors.push(container_diagnostic(&e)),
            }
        }
        FileKind::Items => {
            report.kind = "items";
            let p = parse_items(bytes.as_slice(), &file);
            table_errors(&mut report, &p.errors, p.records.len());
        }
        FileKind::Ratings => {
            report.kind = "ratings";
            let p = parse_ratings(bytes.as_slice(), &file);
            let mut errors = p.errors.iter().map(table_diagnostic).collect::<Vec<_>>();
            if let Some(items) = items {
                errors.extend(dangling_ratings(items, &p, &file).iter().map(table_diagnostic));
            } else {
                report
                    .notes
                    .push("references not checked (pass --items to check them)".into());
            }
            report.records = p.records.len();
            report.errors = errors;
        }
        FileKind::Scores => {
            report.kind = "scores";
            let p = parse_scores(bytes.as_slice(), &file);
            table_errors(&mut report, &p.errors, p.records.len());
        }
    }
    report
}
