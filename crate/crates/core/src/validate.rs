//! Schema checks for every artifact the pipeline reads or writes.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{artifacts, RunReport};
use crate::project::{self};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Documents,
    Normalized,
    Embeddings,
    EmbeddingsMeta,
    Scaler,
    SaeModel,
    TrainingLog,
    Codes,
    Clusters,
    Metrics,
    Projection,
    Scatter,
    Report,
}

impl ArtifactKind {
    pub const ALL: [ArtifactKind; 13] = [
        ArtifactKind::Documents,
        ArtifactKind::Normalized,
        ArtifactKind::Embeddings,
        ArtifactKind::EmbeddingsMeta,
        ArtifactKind::Scaler,
        ArtifactKind::SaeModel,
        ArtifactKind::TrainingLog,
        ArtifactKind::Codes,
        ArtifactKind::Clusters,
        ArtifactKind::Metrics,
        ArtifactKind::Projection,
        ArtifactKind::Scatter,
        ArtifactKind::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ArtifactKind::Documents => "documents",
            ArtifactKind::Normalized => "normalized",
            ArtifactKind::Embeddings => "embeddings",
            ArtifactKind::EmbeddingsMeta => "embeddings_meta",
            ArtifactKind::Scaler => "scaler",
            ArtifactKind::SaeModel => "sae_model",
            ArtifactKind::TrainingLog => "training_log",
            ArtifactKind::Codes => "codes",
            ArtifactKind::Clusters => "clusters",
            ArtifactKind::Metrics => "metrics",
            ArtifactKind::Projection => "projection",
            ArtifactKind::Scatter => "scatter",
            ArtifactKind::Report => "report",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Kind implied by the file name. Pipeline names match exactly; other
    /// names fall back on suffixes (`*.meta.json`, `*embeddings*.jsonl`,
    /// `*codes*.jsonl`, `*normalized*.jsonl`, other `*.jsonl` as documents).
    pub fn detect(path: &Path) -> Option<Self> {
        let name = path.file_name()?.to_str()?;
        let exact = match name {
            artifacts::NORMALIZED => Some(ArtifactKind::Normalized),
            artifacts::EMBEDDINGS => Some(ArtifactKind::Embeddings),
            artifacts::EMBEDDINGS_META => Some(ArtifactKind::EmbeddingsMeta),
            artifacts::SCALER => Some(ArtifactKind::Scaler),
            artifacts::MODEL => Some(ArtifactKind::SaeModel),
            artifacts::TRAINING_LOG => Some(ArtifactKind::TrainingLog),
            artifacts::CODES => Some(ArtifactKind::Codes),
            artifacts::CLUSTERS => Some(ArtifactKind::Clusters),
            artifacts::METRICS => Some(ArtifactKind::Metrics),
            artifacts::PROJECTION => Some(ArtifactKind::Projection),
            artifacts::SCATTER => Some(ArtifactKind::Scatter),
            artifacts::REPORT => Some(ArtifactKind::Report),
            _ => None,
        };
        if exact.is_some() {
            return exact;
        }
        if name.ends_with(".meta.json") {
            Some(ArtifactKind::EmbeddingsMeta)
        } else if name.ends_with(".jsonl") {
            Some(if name.contains("embeddings") {
                ArtifactKind::Embeddings
            } else if name.contains("codes") {
                ArtifactKind::Codes
            } else if name.contains("normalized") {
                ArtifactKind::Normalized
            } else {
                ArtifactKind::Documents
            })
        } else if name.ends_with(".svg") {
            Some(ArtifactKind::Scatter)
        } else {
            None
        }
    }
}

/// What a successful check found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validated {
    pub kind: ArtifactKind,
    /// Rows, records or entries, depending on the kind.
    pub records: usize,
}

pub fn validate_path(path: &Path) -> Result<Validated> {
    let kind = ArtifactKind::detect(path)
        .ok_or_else(|| Error::Invalid(format!("cannot tell the artifact kind of {}", path.display())))?;
    validate_as(kind, path)
}

pub fn validate_as(kind: ArtifactKind, path: &Path) -> Result<Validated> {
    let records = match kind {
        ArtifactKind::Documents => artifacts::read_documents(path)?.len(),
        ArtifactKind::Normalized => artifacts::read_normalized(path)?.len(),
        ArtifactKind::Embeddings | ArtifactKind::Codes => {
            let (ids, data) = artifacts::read_vectors(path)?;
            if kind == ArtifactKind::Embeddings {
                let meta_path = artifacts::meta_path_for(path);
                if meta_path.is_file() {
                    let meta = artifacts::read_meta(&meta_path)?;
                    check_meta_counts(&meta, ids.len(), data.ncols())?;
                }
            }
            ids.len()
        }
        ArtifactKind::EmbeddingsMeta => {
            let meta = artifacts::read_meta(path)?;
            if meta.dim == 0 {
                return Err(Error::Invalid("embeddings meta dim must be positive".into()));
            }
            meta.count
        }
        ArtifactKind::Scaler => artifacts::read_scaler(path)?.dim(),
        ArtifactKind::SaeModel => {
            let model = artifacts::read_model(path)?;
            model.encoder.len() + model.decoder.len()
        }
        ArtifactKind::TrainingLog => artifacts::read_training_log(path)?
            .phases
            .iter()
            .map(|p| p.epochs.len())
            .sum(),
        ArtifactKind::Clusters => artifacts::read_clusters(path)?.labels.len(),
        ArtifactKind::Metrics => artifacts::read_metrics(path)?.n,
        ArtifactKind::Projection => validate_projection(path)?,
        ArtifactKind::Scatter => validate_svg(path)?,
        ArtifactKind::Report => validate_report(path)?,
    };
    Ok(Validated { kind, records })
}

fn check_meta_counts(meta: &crate::embed::EmbeddingMeta, count: usize, dim: usize) -> Result<()> {
    if meta.count != count {
        return Err(Error::Dimension {
            context: "embeddings meta count".into(),
            expected: count,
            found: meta.count,
        });
    }
    if count > 0 && meta.dim != dim {
        return Err(Error::Dimension {
            context: "embeddings meta dim".into(),
            expected: dim,
            found: meta.dim,
        });
    }
    Ok(())
}

fn validate_projection(path: &Path) -> Result<usize> {
    let text = artifacts::read_text(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != "id,x,y,cluster,rank" {
        return Err(Error::Parse {
            line: 1,
            message: format!("projection header must be id,x,y,cluster,rank, found {header:?}"),
        });
    }
    let mut csv = csv::Reader::from_reader(text.as_bytes());
    let mut ids = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in csv.records().enumerate() {
        let line = i + 2;
        let bad = |message: String| Error::Parse { line, message };
        let record = record.map_err(|e| bad(e.to_string()))?;
        for (k, name) in [(1, "x"), (2, "y")] {
            let v: f64 = record[k].parse().map_err(|_| bad(format!("{name} is not a number")))?;
            if !v.is_finite() {
                return Err(bad(format!("{name} is not finite")));
            }
        }
        record[3]
            .parse::<usize>()
            .map_err(|_| bad("cluster is not a non-negative integer".into()))?;
        if !record[4].is_empty() {
            let rank: usize = record[4].parse().map_err(|_| bad("rank is not an integer".into()))?;
            if rank == 0 {
                return Err(bad("ranks start at 1".into()));
            }
        }
        if !seen.insert(record[0].to_string()) {
            return Err(Error::DuplicateId(record[0].to_string()));
        }
        ids.push(record[0].to_string());
    }
    // The coordinate columns must also be importable.
    project::import_coords(text.as_bytes(), &ids)?;
    Ok(ids.len())
}

fn validate_svg(path: &Path) -> Result<usize> {
    let text = artifacts::read_text(path)?;
    if !text.starts_with("<svg") || !text.trim_end().ends_with("</svg>") {
        return Err(Error::Invalid("scatter file is not a single <svg> document".into()));
    }
    Ok(text.matches("<circle").count())
}

fn validate_report(path: &Path) -> Result<usize> {
    let text = artifacts::read_text(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let keys = ["config", "timings_ms", "training", "clustering", "metrics", "artifacts"];
    let object = value
        .as_object()
        .ok_or_else(|| Error::Invalid("report must be a JSON object".into()))?;
    for key in keys {
        if !object.contains_key(key) {
            return Err(Error::MissingField { line: 1, field: key });
        }
    }
    let report: RunReport = serde_json::from_value(value).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    report.config.validate()?;
    report.metrics.validate()?;
    if report.clustering.sizes.len() != report.clustering.k {
        return Err(Error::Invalid("clustering sizes do not match k".into()));
    }
    Ok(report.clustering.sizes.iter().sum())
}
