//! CSV ingestion for corpus items, ratings and metric scores.
//!
//! Row numbers in errors are 1-based file line numbers of the record start
//! (the header is line 1), so quoted multi-line fields do not shift them.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};
use ctxscore_core::corpus::{CorpusError, CorpusItem, Dimension, Group, RatingRecord};
use ctxscore_core::metrics::MetricResult;

pub const ITEMS_HEADER: [&str; 4] = ["description_id", "image_id", "context_id", "description_text"];
pub const RATINGS_HEADER: [&str; 5] = ["description_id", "rater_id", "group", "dimension", "value"];
pub const SCORES_HEADER: [&str; 5] = [
    "description_id",
    "clipscore",
    "contextual_clipscore",
    "contextual_clipscore_normalized",
    "spurts",
];

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("{file}: row {row}: {message}")]
    SchemaError {
        file: String,
        row: u64,
        message: String,
    },
    #[error("{file}: row {row}: rating value {value} outside 1..=5")]
    RangeError { file: String, row: u64, value: i64 },
    #[error("{file}: row {row}: unknown description `{description_id}`")]
    DanglingReference {
        file: String,
        row: u64,
        description_id: String,
    },
    #[error("{file}: row {row}: {message}")]
    Duplicate {
        file: String,
        row: u64,
        message: String,
    },
    #[error("{file}: {source}")]
    Io {
        file: String,
        source: std::io::Error,
    },
}

impl TableError {
    pub fn row(&self) -> Option<u64> {
        match self {
            TableError::SchemaError { row, .. }
            | TableError::RangeError { row, .. }
            | TableError::DanglingReference { row, .. }
            | TableError::Duplicate { row, .. } => Some(*row),
            TableError::Io { .. } => None,
        }
    }
}

/// Which of the known tables a header belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Items,
    Ratings,
    Scores,
}

impl TableKind {
    pub fn header(self) -> &'static [&'static str] {
        match self {
            TableKind::Items => &ITEMS_HEADER,
            TableKind::Ratings => &RATINGS_HEADER,
            TableKind::Scores => &SCORES_HEADER,
        }
    }

    pub fn detect(header_line: &str) -> Option<TableKind> {
        let fields: Vec<&str> = header_line.trim_end_matches(['\r', '\n']).split(',').collect();
        [TableKind::Items, TableKind::Ratings, TableKind::Scores]
            .into_iter()
            .find(|k| k.header() == fields.as_slice())
    }
}

/// Parse outcome keeping every row-level problem instead of stopping at the
/// first one.
#[derive(Debug)]
pub struct Parsed<T> {
    pub records: Vec<(u64, T)>,
    pub errors: Vec<TableError>,
}

impl<T> Parsed<T> {
    pub fn into_result(mut self) -> Result<Vec<T>, TableError> {
        if self.errors.is_empty() {
            Ok(self.records.into_iter().map(|(_, r)| r).collect())
        } else {
            Err(self.errors.swap_remove(0))
        }
    }
}

fn schema(file: &str, row: u64, message: impl Into<String>) -> TableError {
    TableError::SchemaError {
        file: file.into(),
        row,
        message: message.into(),
    }
}

fn parse_table<R, T, F>(reader: R, file: &str, kind: TableKind, mut row_fn: F) -> Parsed<T>
where
    R: Read,
    F: FnMut(&StringRecord, u64) -> Result<T, TableError>,
{
    let mut out = Parsed {
        records: Vec::new(),
        errors: Vec::new(),
    };
    let mut rdr = ReaderBuilder::new().has_headers(true).from_reader(reader);
    match rdr.headers() {
        Ok(h) if h.iter().eq(kind.header().iter().copied()) => {}
        Ok(h) => {
            out.errors.push(schema(
                file,
                1,
                format!(
                    "expected header `{}`, found `{}`",
                    kind.header().join(","),
                    h.iter().collect::<Vec<_>>().join(",")
                ),
            ));
            return out;
        }
        Err(e) => {
            out.errors.push(schema(file, 1, e.to_string()));
            return out;
        }
    }
    let mut record = StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let row = record.position().map_or(0, |p| p.line());
                match row_fn(&record, row) {
                    Ok(r) => out.records.push((row, r)),
                    Err(e) => out.errors.push(e),
                }
            }
            Err(e) => {
                let row = e.position().map_or(0, |p| p.line());
                let fatal = !matches!(e.kind(), csv::ErrorKind::UnequalLengths { .. } | csv::ErrorKind::Utf8 { .. });
                out.errors.push(schema(file, row, e.to_string()));
                if fatal {
                    break;
                }
            }
        }
    }
    out
}

fn corpus_error(file: &str, row: u64, e: CorpusError) -> TableError {
    match e {
        CorpusError::RangeError(value) => TableError::RangeError {
            file: file.into(),
            row,
            value,
        },
        other => schema(file, row, other.to_string()),
    }
}

pub fn parse_items<R: Read>(reader: R, file: &str) -> Parsed<CorpusItem> {
    let mut seen = BTreeSet::new();
    parse_table(reader, file, TableKind::Items, |rec, row| {
        let item = CorpusItem::new(&rec[0], &rec[1], &rec[2], &rec[3])
            .map_err(|e| corpus_error(file, row, e))?;
        if !seen.insert(item.description_id.clone()) {
            return Err(TableError::Duplicate {
                file: file.into(),
                row,
                message: format!("duplicate description id `{}`", item.description_id),
            });
        }
        Ok(item)
    })
}

pub fn parse_ratings<R: Read>(reader: R, file: &str) -> Parsed<RatingRecord> {
    let mut seen = BTreeSet::new();
    parse_table(reader, file, TableKind::Ratings, |rec, row| {
        let group: Group = rec[2].parse().map_err(|e| corpus_error(file, row, e))?;
        let dimension: Dimension = rec[3].parse().map_err(|e| corpus_error(file, row, e))?;
        let value: i64 = rec[4]
            .trim()
            .parse()
            .map_err(|_| schema(file, row, format!("rating value `{}` is not an integer", &rec[4])))?;
        let r = RatingRecord::new(&rec[0], &rec[1], group, dimension, value)
            .map_err(|e| corpus_error(file, row, e))?;
        let key = (r.description_id.clone(), r.rater_id.clone(), r.group, r.dimension);
        if !seen.insert(key) {
            return Err(TableError::Duplicate {
                file: file.into(),
                row,
                message: format!(
                    "duplicate rating of `{}` by `{}` ({}, {})",
                    r.description_id, r.rater_id, r.group, r.dimension
                ),
            });
        }
        Ok(r)
    })
}

fn parse_optional(file: &str, row: u64, field: &str, s: &str) -> Result<Option<f64>, TableError> {
    if s.is_empty() {
        return Ok(None);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| schema(file, row, format!("`{field}` value `{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(schema(file, row, format!("`{field}` is not finite")));
    }
    Ok(Some(v))
}

pub fn parse_scores<R: Read>(reader: R, file: &str) -> Parsed<MetricResult> {
    let mut seen = BTreeSet::new();
    parse_table(reader, file, TableKind::Scores, |rec, row| {
        if rec[0].is_empty() {
            return Err(schema(file, row, "empty description_id"));
        }
        if !seen.insert(rec[0].to_string()) {
            return Err(TableError::Duplicate {
                file: file.into(),
                row,
                message: format!("duplicate description id `{}`", &rec[0]),
            });
        }
        let clipscore = parse_optional(file, row, SCORES_HEADER[1], &rec[1])?
            .ok_or_else(|| schema(file, row, "missing clipscore"))?;
        Ok(MetricResult {
            description_id: rec[0].to_string(),
            clipscore,
            contextual_clipscore: parse_optional(file, row, SCORES_HEADER[2], &rec[2])?,
            contextual_clipscore_normalized: parse_optional(file, row, SCORES_HEADER[3], &rec[3])?,
            spurts: parse_optional(file, row, SCORES_HEADER[4], &rec[4])?,
        })
    })
}

fn open(path: &Path) -> Result<File, TableError> {
    File::open(path).map_err(|source| TableError::Io {
        file: display_name(path),
        source,
    })
}

pub(crate) fn display_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn load_items(path: &Path) -> Result<Vec<CorpusItem>, TableError> {
    parse_items(open(path)?, &display_name(path)).into_result()
}

pub fn load_ratings(path: &Path) -> Result<Vec<RatingRecord>, TableError> {
    parse_ratings(open(path)?, &display_name(path)).into_result()
}

pub fn load_scores(path: &Path) -> Result<Vec<MetricResult>, TableError> {
    parse_scores(open(path)?, &display_name(path)).into_result()
}

/// Reports ratings that reference descriptions absent from `items`.
pub fn dangling_ratings(
    items: &[CorpusItem],
    ratings: &Parsed<RatingRecord>,
    file: &str,
) -> Vec<TableError> {
    let ids: BTreeSet<&str> = items.iter().map(|i| i.description_id.as_str()).collect();
    ratings
        .records
        .iter()
        .filter(|(_, r)| !ids.contains(r.description_id.as_str()))
        .map(|(row, r)| TableError::DanglingReference {
            file: file.into(),
            row: *row,
            description_id: r.description_id.clone(),
        })
        .collect()
}

/// Loads and cross-checks an items file and a ratings file.
pub fn load_corpus(
    items_path: &Path,
    ratings_path: &Path,
) -> Result<(Vec<CorpusItem>, Vec<RatingRecord>), TableError> {
    let items = load_items(items_path)?;
    let file = display_name(ratings_path);
    let ratings = parse_ratings(open(ratings_path)?, &file);
    if let Some(e) = dangling_ratings(&items, &ratings, &file).into_iter().next() {
        return Err(e);
    }
    let ratings = ratings.into_result()?;
    Ok((items, ratings))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Renders `scores.csv`. Absent values are empty fields.
pub fn write_scores(results: &[MetricResult]) -> Vec<u8> {
    let mut w = WriterBuilder::new().from_writer(Vec::new());
    w.write_record(SCORES_HEADER).expect("in-memory write");
    for r in results {
        w.write_record([
            r.description_id.clone(),
            r.clipscore.to_string(),
            fmt_opt(r.contextual_clipscore),
            fmt_opt(r.contextual_clipscore_normalized),
            fmt_opt(r.spurts),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}
