//! CTXM tensor container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "CTXM" | u32 version = 1 | u64 header_len | JSON header | f32 payload
//! ```
//!
//! The header is `{"entries":{"<name>":{"dtype":"f32","shape":[..],"offset":N,"byte_length":M}}}`
//! with offsets relative to the start of the payload. The writer orders
//! entries by name and packs them contiguously.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

pub const MAGIC: [u8; 4] = *b"CTXM";
pub const VERSION: u32 = 1;
const PREAMBLE_LEN: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum ContainerError {
    #[error("not a CTXM container")]
    NotAContainer,
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    #[error("truncated payload at byte {at_byte}: need {expected} payload bytes, found {actual}")]
    TruncatedPayload {
        expected: u64,
        actual: u64,
        /// Absolute file offset where data runs out.
        at_byte: u64,
    },
    #[error("duplicate entry `{0}`")]
    DuplicateEntry(String),
    #[error("entry `{name}`: shape {shape:?} needs {expected} values, got {actual}")]
    ShapeMismatch {
        name: String,
        shape: Vec<usize>,
        expected: usize,
        actual: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense f32 array.
#[derive(Debug, Clone)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Self {
        Self { shape, data }
    }
}

/// Bit-level equality, so NaN payloads compare equal to themselves.
impl PartialEq for Tensor {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape
            && self.data.len() == other.data.len()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TensorContainer {
    pub entries: BTreeMap<String, Tensor>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryHeader {
    dtype: String,
    shape: Vec<usize>,
    offset: u64,
    byte_length: u64,
}

#[derive(Serialize)]
struct HeaderOut<'a> {
    entries: BTreeMap<&'a str, EntryHeader>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderIn {
    entries: EntryList,
}

/// JSON object kept as an ordered list so that repeated keys are visible.
struct EntryList(Vec<(String, EntryHeader)>);

impl<'de> Deserialize<'de> for EntryList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ListVisitor;
        impl<'de> Visitor<'de> for ListVisitor {
            type Value = EntryList;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map of entry headers")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<EntryList, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry()? {
                    out.push((k, v));
                }
                Ok(EntryList(out))
            }
        }
        d.deserialize_map(ListVisitor)
    }
}

fn element_count(shape: &[usize]) -> Option<usize> {
    shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))
}

impl TensorContainer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry after checking the data fills the shape.
    pub fn insert(
        &mut self,
        name: impl Into<String>,
        shape: Vec<usize>,
        data: Vec<f32>,
    ) -> Result<(), ContainerError> {
        let name = name.into();
        let expected = element_count(&shape).unwrap_or(usize::MAX);
        if expected != data.len() {
            return Err(ContainerError::ShapeMismatch {
                name,
                shape,
                expected,
                actual: data.len(),
            });
        }
        if self.entries.contains_key(&name) {
            return Err(ContainerError::DuplicateEntry(name));
        }
        self.entries.insert(name, Tensor::new(shape, data));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.get(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut offset = 0u64;
        let mut entries = BTreeMap::new();
        for (name, t) in &self.entries {
            let byte_length = 4 * t.data.len() as u64;
            entries.insert(
                name.as_str(),
                EntryHeader {
                    dtype: "f32".into(),
                    shape: t.shape.clone(),
                    offset,
                    byte_length,
                },
            );
            offset += byte_length;
        }
        let header = serde_json::to_vec(&HeaderOut { entries }).expect("header serializes");
        let mut out = Vec::with_capacity(PREAMBLE_LEN + header.len() + offset as usize);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for t in self.entries.values() {
            for v in &t.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), ContainerError> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ContainerError> {
        if bytes.len() < 4 || bytes[..4] != MAGIC {
            return Err(ContainerError::NotAContainer);
        }
        if bytes.len() < PREAMBLE_LEN {
            return Err(ContainerError::CorruptHeader(format!(
                "preamble needs {PREAMBLE_LEN} bytes, file has {}",
                bytes.len()
            )));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(ContainerError::UnsupportedVersion(version));
        }
        let header_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let available = (bytes.len() - PREAMBLE_LEN) as u64;
        if header_len > available {
            return Err(ContainerError::CorruptHeader(format!(
                "header length {header_len} exceeds remaining {available} bytes"
            )));
        }
        let header_end = PREAMBLE_LEN + header_len as usize;
        let header: HeaderIn = serde_json::from_slice(&bytes[PREAMBLE_LEN..header_end])
            .map_err(|e| ContainerError::CorruptHeader(e.to_string()))?;
        let payload = &bytes[header_end..];

        let mut seen = std::collections::BTreeSet::new();
        for (name, e) in &header.entries.0 {
            if !seen.insert(name.as_str()) {
                return Err(ContainerError::DuplicateEntry(name.clone()));
            }
            if e.dtype != "f32" {
                return Err(ContainerError::CorruptHeader(format!(
                    "entry `{name}` has dtype `{}`",
                    e.dtype
                )));
            }
            let count = element_count(&e.shape).and_then(|c| c.checked_mul(4));
            if count.map(|c| c as u64) != Some(e.byte_length) {
                return Err(ContainerError::CorruptHeader(format!(
                    "entry `{name}`: shape {:?} does not match byte_length {}",
                    e.shape, e.byte_length
                )));
            }
            if e.offset.checked_add(e.byte_length).is_none() {
                return Err(ContainerError::CorruptHeader(format!(
                    "entry `{name}` range overflows"
                )));
            }
        }

        // Ranges sorted by offset must not overlap. Whether a range running
        // past the data is truncation or a bad header depends on whether the
        // ranges pack contiguously from 0, as the writer produces them.
        let mut ranges: Vec<(u64, u64, &str)> = header
            .entries
            .0
            .iter()
            .filter(|(_, e)| e.byte_length > 0)
            .map(|(n, e)| (e.offset, e.offset + e.byte_length, n.as_str()))
            .collect();
        ranges.sort();
        let mut packed = true;
        let mut cursor = 0u64;
        for &(start, end, name) in &ranges {
            if start < cursor {
                return Err(ContainerError::CorruptHeader(format!(
                    "entry `{name}` overlaps a preceding entry"
                )));
            }
            packed &= start == cursor;
            cursor = end;
        }
        let extent = cursor;
        let actual = payload.len() as u64;
        if extent > actual {
            if packed {
                return Err(ContainerError::TruncatedPayload {
                    expected: extent,
                    actual,
                    at_byte: bytes.len() as u64,
                });
            }
            let (_, _, name) = ranges
                .iter()
                .find(|(_, end, _)| *end > actual)
                .expect("some range exceeds the payload");
            return Err(ContainerError::CorruptHeader(format!(
                "entry `{name}` lies beyond the {actual}-byte payload"
            )));
        }
        if extent < actual {
            return Err(ContainerError::CorruptHeader(format!(
                "{} trailing bytes after the last entry",
                actual - extent
            )));
        }
        let mut container = TensorContainer::new();
        for (name, e) in header.entries.0 {
            let start = e.offset as usize;
            let raw = &payload[start..start + e.byte_length as usize];
            let data = raw
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect();
            container.entries.insert(name, Tensor::new(e.shape, data));
        }
        Ok(container)
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, ContainerError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

/// Serializes a list of `(name, shape, data)` entries.
pub fn write_container<I, S>(entries: I) -> Result<Vec<u8>, ContainerError>
where
    I: IntoIterator<Item = (S, Vec<usize>, Vec<f32>)>,
    S: Into<String>,
{
    let mut c = TensorContainer::new();
    for (name, shape, data) in entries {
        c.insert(name, shape, data)?;
    }
    Ok(c.to_bytes())
}

pub fn read_container(bytes: &[u8]) -> Result<TensorContainer, ContainerError> {
    TensorContainer::from_bytes(bytes)
}
