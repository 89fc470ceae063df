//! A small hand-built corpus with planted structure, used by the bundled
//! fixtures and the end-to-end tests.
//!
//! Eight descriptions cover four images, two descriptions each. The BLV
//! overall rating of every description is planted so that its CLIPScore is
//! an affine function of it: `cos(image, description) = 0.1 + 0.1 * rating`.
//! The mean ratings of every other group and dimension are integer vectors
//! orthogonal to the centered planted vector, so their sample correlation
//! with CLIPScore is zero up to rounding.

use std::path::Path;

use ctxscore_core::corpus::{Dimension, Group};
use ctxscore_core::metrics::{strip_stopwords, StopwordList};

use crate::container::{ContainerError, TensorContainer};
use crate::output::write_atomic;

pub const N_DESCRIPTIONS: usize = 8;
const DIM: usize = 8;
const LAYERS: usize = 2;
const HEADS: usize = 2;

/// Mean BLV overall rating per description.
pub const PLANTED: [i64; N_DESCRIPTIONS] = [1, 2, 4, 5, 3, 5, 2, 2];

/// Mean ratings of the remaining group and dimension cells, in the order of
/// [`rating_cells`] after the planted cell.
const OTHERS: [[i64; N_DESCRIPTIONS]; 13] = [
    [5, 2, 2, 2, 1, 5, 2, 2],
    [5, 1, 2, 4, 4, 2, 1, 2],
    [3, 2, 4, 3, 1, 1, 3, 1],
    [3, 5, 1, 4, 1, 4, 4, 2],
    [4, 3, 2, 5, 1, 3, 4, 3],
    [3, 4, 3, 1, 2, 4, 1, 2],
    [2, 2, 2, 1, 5, 4, 4, 2],
    [2, 3, 3, 2, 1, 2, 3, 1],
    [3, 2, 4, 3, 1, 4, 5, 5],
    [2, 5, 1, 4, 4, 4, 3, 5],
    [2, 1, 3, 1, 1, 4, 5, 3],
    [2, 4, 5, 1, 4, 2, 1, 2],
    [4, 1, 4, 4, 2, 1, 4, 1],
];

const TEXTS: [&str; N_DESCRIPTIONS] = [
    "A red gazebo stands beside a quiet lake.",
    "Wooden gazebo with a pointed roof near the water.",
    "Two children chase a kite across a windy beach.",
    "Kids running on sand while a yellow kite flies overhead.",
    "A chart of monthly rainfall in three cities.",
    "Bar graph comparing rainfall totals for Oslo, Lima and Perth.",
    "Portrait of a violinist on stage under warm lights.",
    "It is there.",
];

/// Group and dimension cells that carry ratings. The planted cell comes first.
pub fn rating_cells() -> Vec<(Group, Dimension)> {
    Group::ALL
        .iter()
        .flat_map(|g| Dimension::ALL.iter().map(move |d| (*g, *d)))
        .filter(|(g, d)| g.measures(*d))
        .collect()
}

pub fn description_id(i: usize) -> String {
    format!("d{i}")
}

pub fn image_id(i: usize) -> String {
    format!("img{}", i / 2)
}

pub fn context_id(i: usize) -> String {
    format!("ctx{}", i / 2)
}

/// Expected mean rating of description `i` in a cell.
pub fn planted_mean(cell: usize, i: usize) -> i64 {
    if cell == 0 {
        PLANTED[i]
    } else {
        OTHERS[cell - 1][i]
    }
}

fn unit(k: usize) -> Vec<f32> {
    let mut v = vec![0.0; DIM];
    v[k] = 1.0;
    v
}

/// Lowercased word tokens with surrounding punctuation removed.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// One attention head: a mix of attending to itself and attending uniformly.
fn head(t: usize, alpha: f32) -> Vec<f32> {
    let spread = (1.0 - alpha) / t as f32;
    let mut w = vec![spread; t * t];
    for r in 0..t {
        w[r * t + r] += alpha;
    }
    w
}

/// The generated corpus as file name → bytes, in a fixed order.
pub fn files() -> Result<Vec<(&'static str, Vec<u8>)>, ContainerError> {
    let mut items = csv::Writer::from_writer(Vec::new());
    items
        .write_record(crate::tables::ITEMS_HEADER)
        .expect("in-memory write");
    for (i, text) in TEXTS.iter().enumerate() {
        items
            .write_record([description_id(i), image_id(i), context_id(i), text.to_string()])
            .expect("in-memory write");
    }

    let mut ratings = csv::Writer::from_writer(Vec::new());
    ratings
        .write_record(crate::tables::RATINGS_HEADER)
        .expect("in-memory write");
    for (cell, (group, dim)) in rating_cells().into_iter().enumerate() {
        for i in 0..N_DESCRIPTIONS {
            let t = planted_mean(cell, i);
            let spread = (2..=4).contains(&t) && (cell + i) % 2 == 1;
            let values = if spread { [t - 1, t + 1] } else { [t, t] };
            for (r, v) in values.iter().enumerate() {
                ratings
                    .write_record([
                        description_id(i),
                        format!("{group}_r{}", r + 1),
                        group.to_string(),
                        dim.to_string(),
                        v.to_string(),
                    ])
                    .expect("in-memory write");
            }
        }
    }

    let mut images = TensorContainer::new();
    let mut contexts = TensorContainer::new();
    for k in 0..N_DESCRIPTIONS / 2 {
        images.insert(format!("img{k}"), vec![DIM], unit(k))?;
        let mut c = vec![0.0; DIM];
        c[k] = 0.6;
        c[(k + 1) % 4] = 0.8;
        contexts.insert(format!("ctx{k}"), vec![DIM], c)?;
    }

    let mut descriptions = TensorContainer::new();
    for (i, planted) in PLANTED.iter().enumerate() {
        let cos = 0.1 + 0.1 * *planted as f64;
        let sin = (1.0 - cos * cos).sqrt();
        let mut d = vec![0.0; DIM];
        d[i / 2] = cos as f32;
        d[4 + i % 4] = sin as f32;
        descriptions.insert(description_id(i), vec![DIM], d)?;
    }

    let stopwords = StopwordList::english();
    let mut attention = TensorContainer::new();
    for (i, text) in TEXTS.iter().enumerate() {
        let t = strip_stopwords(&tokenize(text), &stopwords).len();
        let shape = vec![LAYERS, HEADS, t, t];
        let weights = (0..LAYERS * HEADS)
            .flat_map(|h| head(t, 0.1 + 0.2 * h as f32 + 0.05 * i as f32))
            .collect();
        attention.insert(description_id(i), shape, weights)?;
    }

    Ok(vec![
        ("items.csv", items.into_inner().expect("in-memory flush")),
        ("ratings.csv", ratings.into_inner().expect("in-memory flush")),
        ("images.ctxm", images.to_bytes()),
        ("descriptions.ctxm", descriptions.to_bytes()),
        ("contexts.ctxm", contexts.to_bytes()),
        ("attention.ctxm", attention.to_bytes()),
    ])
}

/// Writes the corpus into `dir`, creating it if needed.
pub fn write_fixtures(dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in files().map_err(std::io::Error::other)? {
        write_atomic(&dir.join(name), &bytes)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centered_dot(a: &[i64], b: &[i64]) -> i64 {
        let n = a.len() as i64;
        let (sa, sb): (i64, i64) = (a.iter().sum(), b.iter().sum());
        a.iter().zip(b).map(|(x, y)| n * x * y).sum::<i64>() - sa * sb
    }

    #[test]
    fn other_cells_are_orthogonal_to_the_planted_one() {
        assert_eq!(rating_cells().len(), OTHERS.len() + 1);
        assert_eq!(rating_cells()[0], (Group::Blv, Dimension::Overall));
        for other in &OTHERS {
            assert_eq!(centered_dot(&PLANTED, other), 0);
            assert!(other.iter().all(|v| (1..=5).contains(v)));
        }
    }

    #[test]
    fn last_text_is_all_stopwords() {
        let list = StopwordList::english();
        assert!(strip_stopwords(&tokenize(TEXTS[7]), &list).is_empty());
        assert_eq!(
            strip_stopwords(&tokenize(TEXTS[0]), &list),
            ["red", "gazebo", "stands", "beside", "quiet", "lake"]
        );
    }
}
