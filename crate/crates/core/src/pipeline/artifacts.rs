//! Artifact file names, atomic writes and typed readers.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Serialize;

use crate::cluster::ClustersFile;
use crate::embed::{self, EmbeddingMatrix, EmbeddingMeta, ScalerParams};
use crate::error::{Error, Result};
use crate::ingest::{self, NormalizedDoc};
use crate::metrics::MetricsReport;
use crate::sae::{self, SaeModel, TrainingLog};

pub const NORMALIZED: &str = "normalized.jsonl";
pub const EMBEDDINGS: &str = "embeddings.jsonl";
pub const EMBEDDINGS_META: &str = "embeddings.meta.json";
pub const SCALER: &str = "scaler.json";
pub const MODEL: &str = "sae_model.json";
pub const TRAINING_LOG: &str = "training_log.csv";
pub const CODES: &str = "codes.jsonl";
pub const CLUSTERS: &str = "clusters.json";
pub const METRICS: &str = "metrics.json";
pub const PROJECTION: &str = "projection.csv";
pub const SCATTER: &str = "scatter.svg";
pub const REPORT: &str = "report.json";

/// Sidecar meta path for an embeddings file: `x.jsonl` → `x.meta.json`.
pub fn meta_path_for(embeddings: &Path) -> PathBuf {
    let stem = embeddings
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    embeddings.with_file_name(format!("{stem}.meta.json"))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut writer = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut writer).map_err(|e| Error::io(path, e))?;
        writer.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, |w| w.write_all(text.as_bytes()))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Invalid(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: format!("{}: {e}", path.display()),
    })
}

pub fn read_documents(path: &Path) -> Result<Vec<ingest::Document>> {
    ingest::parse_documents(open(path)?)
}

pub fn read_normalized(path: &Path) -> Result<Vec<NormalizedDoc>> {
    ingest::parse_normalized(open(path)?)
}

pub fn write_normalized(path: &Path, docs: &[NormalizedDoc]) -> Result<()> {
    write_atomic(path, |w| ingest::write_normalized(w, docs))
}

pub fn read_meta(path: &Path) -> Result<EmbeddingMeta> {
    read_json(path)
}

/// Embeddings aligned to `ids`, cross-checked against the meta file.
pub fn read_embeddings(path: &Path, meta: &Path, ids: &[String]) -> Result<EmbeddingMatrix> {
    let meta = read_meta(meta)?;
    embed::load_embeddings_checked(open(path)?, &meta, ids)
}

pub fn write_embeddings(dir: &Path, m: &EmbeddingMatrix) -> Result<()> {
    write_atomic(&dir.join(EMBEDDINGS), |w| embed::write_embeddings(w, m))?;
    write_json(&dir.join(EMBEDDINGS_META), &m.meta())
}

/// Any `{"id","vec"}` JSONL file in its own row order.
pub fn read_vectors(path: &Path) -> Result<(Vec<String>, Array2<f64>)> {
    let ids = embed::read_embedding_ids(open(path)?)?;
    let m = embed::load_embeddings(open(path)?, &ids)?;
    Ok((m.ids, m.data))
}

pub fn write_vectors(path: &Path, ids: &[String], data: &Array2<f64>) -> Result<()> {
    write_atomic(path, |w| embed::write_vectors(w, ids, data))
}

pub fn read_scaler(path: &Path) -> Result<ScalerParams> {
    let s: ScalerParams = read_json(path)?;
    s.validate()?;
    Ok(s)
}

pub fn read_model(path: &Path) -> Result<SaeModel> {
    SaeModel::from_json(&read_text(path)?)
}

pub fn write_model(path: &Path, model: &SaeModel) -> Result<()> {
    write_text(path, &model.to_json())
}

pub fn read_training_log(path: &Path) -> Result<TrainingLog> {
    sae::read_training_log(open(path)?)
}

pub fn write_training_log(path: &Path, log: &TrainingLog) -> Result<()> {
    let mut buf = Vec::new();
    sae::write_training_log(&mut buf, log)?;
    write_atomic(path, |w| w.write_all(&buf))
}

pub fn read_clusters(path: &Path) -> Result<ClustersFile> {
    let c: ClustersFile = read_json(path)?;
    c.validate()?;
    Ok(c)
}

pub fn read_metrics(path: &Path) -> Result<MetricsReport> {
    let m: MetricsReport = read_json(path)?;
    m.validate()?;
    Ok(m)
}
