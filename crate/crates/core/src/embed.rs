//! Fixed-length document vectors.
//!
//! Vectors either come from an external model through `embeddings.jsonl`, or
//! from the built-in signed feature-hashing embedder over character 3-grams.
//! Before training they are min-max scaled per dimension onto `[0, 1]`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::NormalizedDoc;
use crate::seed::mix64;

pub const DEFAULT_DIM: usize = 768;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingSource {
    External,
    Hash,
}

/// Row-aligned document vectors: row `i` belongs to `ids[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub ids: Vec<String>,
    pub data: Array2<f64>,
    pub source: EmbeddingSource,
}

impl EmbeddingMatrix {
    pub fn new(ids: Vec<String>, data: Array2<f64>, source: EmbeddingSource) -> Result<Self> {
        if ids.len() != data.nrows() {
            return Err(Error::Dimension {
                context: "embedding rows vs ids".into(),
                expected: ids.len(),
                found: data.nrows(),
            });
        }
        let mut seen = HashSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            let row = pos / data.ncols().max(1);
            return Err(Error::NonFinite(format!("embedding of {:?}", ids[row])));
        }
        Ok(Self { ids, data, source })
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn meta(&self) -> EmbeddingMeta {
        EmbeddingMeta {
            dim: self.dim(),
            count: self.len(),
            source: self.source,
            extra: BTreeMap::new(),
        }
    }
}

/// `embeddings.meta.json`. Unknown keys (model id, revision, pooling from the
/// exporter) are preserved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMeta {
    pub dim: usize,
    pub count: usize,
    pub source: EmbeddingSource,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct Record {
    id: String,
    vec: Vec<f64>,
}

#[derive(Serialize)]
struct RecordRef<'a> {
    id: &'a str,
    vec: &'a [f64],
}

/// Loads `embeddings.jsonl` and reorders its rows to `expected_ids`.
pub fn load_embeddings<R: BufRead>(reader: R, expected_ids: &[String]) -> Result<EmbeddingMatrix> {
    let mut by_id: HashMap<String, Vec<f64>> = HashMap::with_capacity(expected_ids.len());
    let mut dim = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let expected = *dim.get_or_insert(record.vec.len());
        if expected == 0 {
            return Err(Error::Invalid(format!("empty vector for {:?}", record.id)));
        }
        if record.vec.len() != expected {
            return Err(Error::Dimension {
                context: format!("embedding of {:?}", record.id),
                expected,
                found: record.vec.len(),
            });
        }
        if record.vec.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("embedding of {:?}", record.id)));
        }
        if by_id.contains_key(&record.id) {
            return Err(Error::DuplicateId(record.id));
        }
        by_id.insert(record.id, record.vec);
    }

    let expected_set: HashSet<&str> = expected_ids.iter().map(String::as_str).collect();
    if let Some(extra) = by_id.keys().filter(|id| !expected_set.contains(id.as_str())).min() {
        return Err(Error::UnknownId(extra.clone()));
    }
    let dim = dim.unwrap_or(0);
    let mut data = Array2::zeros((expected_ids.len(), dim));
    for (row, id) in expected_ids.iter().enumerate() {
        let vec = by_id.get(id).ok_or_else(|| Error::MissingId(id.clone()))?;
        data.row_mut(row).assign(&ArrayView1::from(vec.as_slice()));
    }
    EmbeddingMatrix::new(expected_ids.to_vec(), data, EmbeddingSource::External)
}

/// Like [`load_embeddings`], additionally cross-checking the sidecar meta.
/// The matrix takes its `source` from the meta.
pub fn load_embeddings_checked<R: BufRead>(
    reader: R,
    meta: &EmbeddingMeta,
    expected_ids: &[String],
) -> Result<EmbeddingMatrix> {
    if meta.count != expected_ids.len() {
        return Err(Error::Dimension {
            context: "embeddings.meta.json count".into(),
            expected: expected_ids.len(),
            found: meta.count,
        });
    }
    let mut m = load_embeddings(reader, expected_ids)?;
    if !m.is_empty() && m.dim() != meta.dim {
        return Err(Error::Dimension {
            context: "embeddings.meta.json dim".into(),
            expected: meta.dim,
            found: m.dim(),
        });
    }
    m.source = meta.source;
    Ok(m)
}

/// Reads every record of an embeddings file in file order, without alignment.
pub fn read_embedding_ids<R: BufRead>(reader: R) -> Result<Vec<String>> {
    #[derive(Deserialize)]
    struct IdOnly {
        id: String,
    }
    let mut ids = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: IdOnly = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        ids.push(rec.id);
    }
    Ok(ids)
}

pub fn write_embeddings<W: Write>(writer: W, m: &EmbeddingMatrix) -> std::io::Result<()> {
    write_vectors(writer, &m.ids, &m.data)
}

/// `{"id":…,"vec":[…]}` lines for any id-aligned matrix (embeddings, codes).
pub fn write_vectors<W: Write>(mut writer: W, ids: &[String], data: &Array2<f64>) -> std::io::Result<()> {
    for (id, row) in ids.iter().zip(data.rows()) {
        let vec = row.to_vec();
        serde_json::to_writer(&mut writer, &RecordRef { id, vec: &vec })?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

const BOUNDARY: char = '#';

/// Hash of a 3-gram: FNV-1a over the little-endian seed, a one-byte tag
/// (1 = bucket, 2 = sign) and the gram's UTF-8 bytes, finished with SplitMix64.
pub fn gram_hash(gram: &str, seed: u64, tag: u8) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for b in seed
        .to_le_bytes()
        .into_iter()
        .chain(std::iter::once(tag))
        .chain(gram.bytes())
    {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    mix64(h)
}

/// Character 3-grams of `#text#`.
pub fn char_trigrams(text: &str) -> Vec<String> {
    if text.is_empty() {
        return Vec::new();
    }
    let chars: Vec<char> = std::iter::once(BOUNDARY)
        .chain(text.chars())
        .chain(std::iter::once(BOUNDARY))
        .collect();
    chars.windows(3).map(|w| w.iter().collect()).collect()
}

fn hash_row(text: &str, dim: usize, seed: u64) -> Array1<f64> {
    let mut row: Array1<f64> = Array1::zeros(dim);
    for gram in char_trigrams(text) {
        let bucket = (gram_hash(&gram, seed, 1) % dim as u64) as usize;
        let sign = if gram_hash(&gram, seed, 2) >> 63 == 0 {
            1.0
        } else {
            -1.0
        };
        row[bucket] += sign;
    }
    let norm = row.dot(&row).sqrt();
    if norm > 0.0 {
        row /= norm;
    }
    row
}

/// Deterministic signed feature hashing of character 3-grams, L2-normalized.
pub fn hash_embed(docs: &[NormalizedDoc], dim: usize, seed: u64) -> Result<EmbeddingMatrix> {
    if dim == 0 {
        return Err(Error::Config("embedding dim must be positive".into()));
    }
    let mut data = Array2::zeros((docs.len(), dim));
    for (mut out, doc) in data.rows_mut().into_iter().zip(docs) {
        out.assign(&hash_row(&doc.text, dim, seed));
    }
    let ids = docs.iter().map(|d| d.id.clone()).collect();
    EmbeddingMatrix::new(ids, data, EmbeddingSource::Hash)
}

/// Per-dimension min-max bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalerParams {
    pub fn fit(data: &Array2<f64>) -> Result<Self> {
        if data.nrows() == 0 {
            return Err(Error::Invalid("cannot fit a scaler on zero rows".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scaler input".into()));
        }
        let mut min = Vec::with_capacity(data.ncols());
        let mut max = Vec::with_capacity(data.ncols());
        for col in data.columns() {
            min.push(col.iter().copied().fold(f64::INFINITY, f64::min));
            max.push(col.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
        Ok(Self { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.min.len() != self.max.len() {
            return Err(Error::Dimension {
                context: "scaler max".into(),
                expected: self.min.len(),
                found: self.max.len(),
            });
        }
        for (j, (lo, hi)) in self.min.iter().zip(&self.max).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::NonFinite(format!("scaler column {j}")));
            }
            if lo > hi {
                return Err(Error::Invalid(format!("scaler column {j} has min > max")));
            }
        }
        Ok(())
    }

    /// `(x - min) / (max - min)`, or 0.5 for constant columns.
    pub fn transform(&self, data: &Array2<f64>) -> Result<Array2<f64>> {
        if data.ncols() != self.dim() {
            return Err(Error::Dimension {
                context: "scaler input columns".into(),
                expected: self.dim(),
                found: data.ncols(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scaler input".into()));
        }
        let mut out = data.clone();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (lo, hi) = (self.min[j], self.max[j]);
            if hi > lo {
                let range = hi - lo;
                col.mapv_inplace(|v| (v - lo) / range);
            } else {
                col.fill(0.5);
            }
        }
        Ok(out)
    }
}

pub fn minmax_fit_transform(m: &EmbeddingMatrix) -> Result<(EmbeddingMatrix, ScalerParams)> {
    let params = ScalerParams::fit(&m.data)?;
    let data = params.transform(&m.data)?;
    Ok((
        EmbeddingMatrix {
            ids: m.ids.clone(),
            data,
            source: m.source,
        },
        params,
    ))
}
