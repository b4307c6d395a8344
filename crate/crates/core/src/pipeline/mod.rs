//! End-to-end orchestration: normalize → embed → scale → train → encode →
//! cluster → rank → metrics → project → report.
//!
//! Every stage is a function that writes its artifacts atomically into the
//! output directory. `run_pipeline` calls them in order; the CLI subcommands
//! call the same functions one at a time, so a sequence of subcommands
//! reproduces a full run byte for byte.
//!
//! Randomness: the hash embedder, the autoencoder and K-means each get
//! [`seed::stage_seed`] of the root seed, so changing anything in one stage
//! never shifts another stage's draws.

pub mod artifacts;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::cluster::{self, ClusterModel, ClusterRanking, ClusterSpec, ClustersFile, KMeansOptions};
use crate::embed::{self, EmbeddingMatrix, ScalerParams};
use crate::error::{Error, Result};
use crate::ingest::{self, NormalizedDoc};
use crate::metrics::{self, MetricsReport};
use crate::project::{self, Projection2D};
use crate::sae::{self, SaeConfig, SaeModel, TrainingLog};
use crate::seed;

/// Where embeddings come from: the built-in hash embedder or an
/// `embeddings.jsonl` produced elsewhere. Written as `"hash"` or a path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum EmbeddingsInput {
    Hash,
    File(PathBuf),
}

impl From<String> for EmbeddingsInput {
    fn from(s: String) -> Self {
        if s == "hash" {
            EmbeddingsInput::Hash
        } else {
            EmbeddingsInput::File(s.into())
        }
    }
}

impl From<EmbeddingsInput> for String {
    fn from(e: EmbeddingsInput) -> Self {
        match e {
            EmbeddingsInput::Hash => "hash".into(),
            EmbeddingsInput::File(p) => p.to_string_lossy().into_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub documents: PathBuf,
    pub embeddings: EmbeddingsInput,
    /// Defaults to the embeddings file's `.meta.json` sibling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings_meta: Option<PathBuf>,
    /// `id,x,y` CSV replacing the PCA projection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<PathBuf>,
    pub out_dir: PathBuf,
}

fn default_top() -> usize {
    cluster::DEFAULT_TOP
}

/// The single JSON configuration document. Relative paths are resolved
/// against `base_dir`, which [`PipelineConfig::load`] sets to the config
/// file's directory. `sae.seed` is replaced by the stage seed derived from
/// `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: PathsConfig,
    pub cluster_spec: ClusterSpec,
    #[serde(default)]
    pub sae: SaeConfig,
    #[serde(default)]
    pub kmeans: KMeansOptions,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_top")]
    pub top: usize,
    /// Write wall-clock timings into report.json. Off by default because
    /// timings make the report differ between otherwise identical runs.
    #[serde(default)]
    pub record_timings: bool,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut config: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        config.base_dir = base_dir.into();
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = artifacts::read_text(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        self.cluster_spec.validate()?;
        self.sae.validate()?;
        if self.top == 0 {
            return Err(Error::Config("top must be at least 1".into()));
        }
        if self.kmeans.restarts == 0 || self.kmeans.max_iter == 0 || self.kmeans.tol.is_nan() || self.kmeans.tol < 0.0 {
            return Err(Error::Config(
                "kmeans restarts and max_iter must be >= 1, tol >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.paths.out_dir)
    }

    /// The autoencoder config actually trained, with the derived seed.
    pub fn effective_sae(&self) -> SaeConfig {
        effective_sae(&self.sae, self.seed)
    }
}

pub fn effective_sae(sae: &SaeConfig, root_seed: u64) -> SaeConfig {
    SaeConfig {
        seed: seed::stage_seed(root_seed, seed::stage::SAE),
        ..sae.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub name: String,
    pub epochs: usize,
    pub first_loss: f64,
    pub final_loss: f64,
    pub final_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub phases: Vec<PhaseSummary>,
    pub code_dim: usize,
    pub parameters: usize,
}

impl TrainingSummary {
    pub fn new(model: &SaeModel, log: &TrainingLog) -> Self {
        let phases = log
            .phases
            .iter()
            .map(|p| {
                let first = p.epochs.first();
                let last = p.epochs.last();
                PhaseSummary {
                    name: p.name.clone(),
                    epochs: p.epochs.len(),
                    first_loss: first.map_or(f64::NAN, |r| r.loss),
                    final_loss: last.map_or(f64::NAN, |r| r.loss),
                    final_accuracy: last.map_or(f64::NAN, |r| r.accuracy),
                }
            })
            .collect();
        Self {
            phases,
            code_dim: model.code_dim(),
            parameters: model.param_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringSummary {
    pub k: usize,
    /// Topic annotations, one per cluster index.
    pub labels: Vec<String>,
    pub sizes: Vec<usize>,
    pub inertia: f64,
    pub iterations_run: usize,
    pub restarts_run: usize,
    pub top: usize,
}

/// `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: PipelineConfig,
    pub timings_ms: BTreeMap<String, f64>,
    pub training: TrainingSummary,
    pub clustering: ClusteringSummary,
    pub metrics: MetricsReport,
    /// Artifact name → file name inside the output directory.
    pub artifacts: BTreeMap<String, String>,
}

fn staged<T>(stage: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(stage))
}

/// Parses documents and writes `normalized.jsonl`.
pub fn normalize_stage(documents: &Path, out: &Path) -> Result<Vec<NormalizedDoc>> {
    staged(
        "normalize",
        (|| {
            let docs = artifacts::read_documents(documents)?;
            let normalized = ingest::normalize_documents(&docs);
            artifacts::write_normalized(&out.join(artifacts::NORMALIZED), &normalized)?;
            Ok(normalized)
        })(),
    )
}

/// Hash-embeds the normalized documents and writes the embeddings pair.
pub fn embed_hash_stage(docs: &[NormalizedDoc], dim: usize, root_seed: u64, out: &Path) -> Result<EmbeddingMatrix> {
    staged(
        "embed",
        (|| {
            let m = embed::hash_embed(docs, dim, seed::stage_seed(root_seed, seed::stage::EMBED))?;
            artifacts::write_embeddings(out, &m)?;
            Ok(m)
        })(),
    )
}

/// Loads external embeddings aligned to `docs` and writes the aligned copy.
pub fn import_embeddings_stage(
    docs: &[NormalizedDoc],
    path: &Path,
    meta: &Path,
    out: &Path,
) -> Result<EmbeddingMatrix> {
    staged(
        "embed",
        (|| {
            let ids: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
            let m = artifacts::read_embeddings(path, meta, &ids)?;
            artifacts::write_embeddings(out, &m)?;
            Ok(m)
        })(),
    )
}

pub struct Trained {
    pub scaler: ScalerParams,
    pub model: SaeModel,
    pub log: TrainingLog,
}

/// Fits the scaler, trains the autoencoder on the scaled embeddings and
/// writes `scaler.json`, `sae_model.json` and `training_log.csv`. `sae` is
/// used as given, seed included.
pub fn train_stage(m: &EmbeddingMatrix, sae: &SaeConfig, out: &Path) -> Result<Trained> {
    staged(
        "train",
        (|| {
            let (scaled, scaler) = embed::minmax_fit_transform(m)?;
            let (model, log) = sae::train_layerwise(sae, &scaled.data)?;
            artifacts::write_json(&out.join(artifacts::SCALER), &scaler)?;
            artifacts::write_model(&out.join(artifacts::MODEL), &model)?;
            artifacts::write_training_log(&out.join(artifacts::TRAINING_LOG), &log)?;
            Ok(Trained { scaler, model, log })
        })(),
    )
}

/// Scales and encodes embeddings and writes `codes.jsonl`.
pub fn encode_stage(m: &EmbeddingMatrix, scaler: &ScalerParams, model: &SaeModel, out: &Path) -> Result<Array2<f64>> {
    staged(
        "encode",
        (|| {
            let scaled = scaler.transform(&m.data)?;
            let codes = sae::encode(model, &scaled)?;
            artifacts::write_vectors(&out.join(artifacts::CODES), &m.ids, &codes)?;
            Ok(codes)
        })(),
    )
}

/// K-means on the codes plus cosine ranking; writes `clusters.json`.
pub fn cluster_stage(
    ids: &[String],
    codes: &Array2<f64>,
    k: usize,
    options: &KMeansOptions,
    top: usize,
    root_seed: u64,
    out: &Path,
) -> Result<(ClusterModel, ClusterRanking)> {
    staged(
        "cluster",
        (|| {
            let model = cluster::kmeans_fit(codes, k, seed::stage_seed(root_seed, seed::stage::CLUSTER), options)?;
            let ranking = cluster::rank_members(codes, &model, ids, top)?;
            artifacts::write_json(
                &out.join(artifacts::CLUSTERS),
                &ClustersFile::new(&model, ids, &ranking),
            )?;
            Ok((model, ranking))
        })(),
    )
}

/// Scores the partition of the codes; writes `metrics.json`.
pub fn metrics_stage(codes: &Array2<f64>, labels: &[usize], out: &Path) -> Result<MetricsReport> {
    staged(
        "metrics",
        (|| {
            let report = metrics::evaluate(codes, labels)?;
            artifacts::write_json(&out.join(artifacts::METRICS), &report)?;
            Ok(report)
        })(),
    )
}

/// PCA of the codes (or imported coordinates); writes `projection.csv` and
/// `scatter.svg`.
pub fn project_stage(
    ids: &[String],
    codes: &Array2<f64>,
    labels: &[usize],
    ranking: &ClusterRanking,
    names: &[String],
    coordinates: Option<&Path>,
    out: &Path,
) -> Result<Projection2D> {
    staged(
        "project",
        (|| {
            let projection = match coordinates {
                Some(path) => {
                    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
                    project::import_coords(std::io::BufReader::new(file), ids)?
                }
                None => project::pca2(codes, ids)?,
            };
            let scatter = project::emit_scatter(&projection, labels, ranking, names)?;
            artifacts::write_text(&out.join(artifacts::PROJECTION), &scatter.csv)?;
            artifacts::write_text(&out.join(artifacts::SCATTER), &scatter.svg)?;
            Ok(projection)
        })(),
    )
}

fn artifact_list() -> BTreeMap<String, String> {
    [
        ("normalized", artifacts::NORMALIZED),
        ("embeddings", artifacts::EMBEDDINGS),
        ("embeddings_meta", artifacts::EMBEDDINGS_META),
        ("scaler", artifacts::SCALER),
        ("sae_model", artifacts::MODEL),
        ("training_log", artifacts::TRAINING_LOG),
        ("codes", artifacts::CODES),
        ("clusters", artifacts::CLUSTERS),
        ("metrics", artifacts::METRICS),
        ("projection", artifacts::PROJECTION),
        ("scatter", artifacts::SCATTER),
        ("report", artifacts::REPORT),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("input file {} does not exist", path.display())))
    }
}

/// Runs every stage and writes `report.json` last. The returned report
/// always carries timings; the file only does with `record_timings`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunReport> {
    config.validate()?;
    let documents = config.resolve(&config.paths.documents);
    require_file(&documents)?;
    let external = match &config.paths.embeddings {
        EmbeddingsInput::Hash => None,
        EmbeddingsInput::File(p) => {
            let path = config.resolve(p);
            let meta = match &config.paths.embeddings_meta {
                Some(m) => config.resolve(m),
                None => artifacts::meta_path_for(&path),
            };
            require_file(&path)?;
            require_file(&meta)?;
            Some((path, meta))
        }
    };
    let coordinates = config.paths.coordinates.as_ref().map(|p| config.resolve(p));
    if let Some(c) = &coordinates {
        require_file(c)?;
    }
    let out = config.out_dir();
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;

    let mut timings = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str| {
        let now = Instant::now();
        timings.insert(name.to_string(), (now - clock).as_secs_f64() * 1e3);
        clock = now;
    };

    let docs = normalize_stage(&documents, &out)?;
    lap("normalize");
    let embeddings = match &external {
        None => embed_hash_stage(&docs, config.sae.input_dim, config.seed, &out)?,
        Some((path, meta)) => import_embeddings_stage(&docs, path, meta, &out)?,
    };
    lap("embed");
    let trained = train_stage(&embeddings, &config.effective_sae(), &out)?;
    lap("train");
    let codes = encode_stage(&embeddings, &trained.scaler, &trained.model, &out)?;
    lap("encode");
    let k = config.cluster_spec.k();
    let (model, ranking) = cluster_stage(
        &embeddings.ids,
        &codes,
        k,
        &config.kmeans,
        config.top,
        config.seed,
        &out,
    )?;
    lap("cluster");
    let metrics = metrics_stage(&codes, &model.labels, &out)?;
    lap("metrics");
    let names = config.cluster_spec.labels();
    project_stage(
        &embeddings.ids,
        &codes,
        &model.labels,
        &ranking,
        &names,
        coordinates.as_deref(),
        &out,
    )?;
    lap("project");

    let mut report = RunReport {
        config: config.clone(),
        timings_ms: BTreeMap::new(),
        training: TrainingSummary::new(&trained.model, &trained.log),
        clustering: summarize_clustering(&model, names, config.top),
        metrics,
        artifacts: artifact_list(),
    };
    write_report(&out, &report, config.record_timings, &timings)?;
    report.timings_ms = timings;
    Ok(report)
}

pub fn summarize_clustering(model: &ClusterModel, labels: Vec<String>, top: usize) -> ClusteringSummary {
    ClusteringSummary {
        k: model.k(),
        labels,
        sizes: model.cluster_sizes(),
        inertia: model.inertia,
        iterations_run: model.iterations_run,
        restarts_run: model.restarts_run,
        top,
    }
}

fn write_report(out: &Path, report: &RunReport, with_timings: bool, timings: &BTreeMap<String, f64>) -> Result<()> {
    let staged_report;
    let report = if with_timings {
        staged_report = RunReport {
            timings_ms: timings.clone(),
            ..report.clone()
        };
        &staged_report
    } else {
        report
    };
    staged("report", artifacts::write_json(&out.join(artifacts::REPORT), report))
}

/// Rebuilds `report.json` from the artifacts already in `out`, as the last
/// step of a subcommand-by-subcommand run.
pub fn report_from_artifacts(config: &PipelineConfig, out: &Path) -> Result<RunReport> {
    staged(
        "report",
        (|| {
            let model = artifacts::read_model(&out.join(artifacts::MODEL))?;
            let log = artifacts::read_training_log(&out.join(artifacts::TRAINING_LOG))?;
            let clusters = artifacts::read_clusters(&out.join(artifacts::CLUSTERS))?;
            let metrics = artifacts::read_metrics(&out.join(artifacts::METRICS))?;
            let (ids, _) = artifacts::read_vectors(&out.join(artifacts::CODES))?;
            let labels = clusters.labels_for(&ids)?;
            let mut sizes = vec![0; clusters.k];
            for &l in &labels {
                sizes[l] += 1;
            }
            let report = RunReport {
                config: config.clone(),
                timings_ms: BTreeMap::new(),
                training: TrainingSummary::new(&model, &log),
                clustering: ClusteringSummary {
                    k: clusters.k,
                    labels: config.cluster_spec.labels(),
                    sizes,
                    inertia: clusters.inertia,
                    iterations_run: clusters.iterations_run,
                    restarts_run: clusters.restarts_run,
                    top: config.top,
                },
                metrics,
                artifacts: artifact_list(),
            };
            artifacts::write_json(&out.join(artifacts::REPORT), &report)?;
            Ok(report)
        })(),
    )
}
