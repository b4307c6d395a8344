use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ras_core::cluster::{ClusterRanking, KMeansOptions, DEFAULT_TOP};
use ras_core::embed::{EmbeddingMatrix, EmbeddingSource};
use ras_core::pipeline::{self, artifacts, EmbeddingsInput, PipelineConfig};
use ras_core::sae::SaeConfig;
use ras_core::validate::{self, ArtifactKind};
use ras_core::{Error, ErrorKind, Result};

/// Cluster Arabic aggregated search results: normalize, embed, compress with
/// a stacked autoencoder, cluster, rank, score and project.
#[derive(Parser)]
#[command(name = "ras", version)]
struct Cli {
    /// Pipeline config (JSON). Relative paths inside it are resolved against
    /// its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config (default: current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// documents JSONL → normalized.jsonl
    Normalize {
        /// Documents file (default: the config's documents path).
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// normalized.jsonl → embeddings.jsonl + embeddings.meta.json with the hash embedder
    EmbedHash {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Embedding width (default: the config's sae.input_dim, else 768).
        #[arg(long)]
        dim: Option<usize>,
    },
    /// embeddings → scaler.json, sae_model.json, training_log.csv
    Train {
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// embeddings + scaler + model → codes.jsonl
    Encode {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        scaler: Option<PathBuf>,
    },
    /// codes.jsonl → clusters.json
    Cluster {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Number of clusters (default: from the config's cluster_spec).
        #[arg(long)]
        k: Option<usize>,
    },
    /// codes + labels → metrics.json
    Metrics {
        #[arg(long)]
        codes: Option<PathBuf>,
        /// clusters.json, or a JSON object mapping id → label.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// codes + clusters → projection.csv, scatter.svg (and report.json with --config)
    Project {
        #[arg(long)]
        codes: Option<PathBuf>,
        #[arg(long)]
        clusters: Option<PathBuf>,
        /// id,x,y CSV to use instead of PCA.
        #[arg(long)]
        coords: Option<PathBuf>,
    },
    /// Every stage in order (requires --config)
    Run,
    /// Schema-check artifact files
    Validate {
        /// Artifact kind, when the file name does not tell.
        #[arg(long)]
        kind: Option<String>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

struct Context {
    config: Option<PipelineConfig>,
    seed: u64,
    out: PathBuf,
    quiet: bool,
}

impl Context {
    fn from_cli(cli: &Cli) -> Result<Self> {
        let mut config = cli.config.as_deref().map(PipelineConfig::load).transpose()?;
        let cwd = std::env::current_dir().map_err(|e| Error::io(".", e))?;
        if let Some(c) = config.as_mut() {
            if let Some(seed) = cli.seed {
                c.seed = seed;
            }
            if let Some(out) = &cli.out {
                c.paths.out_dir = cwd.join(out);
            }
        }
        let out = match (&cli.out, &config) {
            (Some(out), _) => cwd.join(out),
            (None, Some(c)) => c.out_dir(),
            (None, None) => cwd,
        };
        let seed = cli.seed.or(config.as_ref().map(|c| c.seed)).unwrap_or(0);
        Ok(Self {
            config,
            seed,
            out,
            quiet: cli.quiet,
        })
    }

    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn require_config(&self, command: &str) -> Result<&PipelineConfig> {
        self.config
            .as_ref()
            .ok_or_else(|| Error::Config(format!("`{command}` needs --config")))
    }

    fn artifact(&self, given: &Option<PathBuf>, name: &str) -> PathBuf {
        given.clone().unwrap_or_else(|| self.out.join(name))
    }

    fn sae(&self) -> SaeConfig {
        let base = self.config.as_ref().map(|c| c.sae.clone()).unwrap_or_default();
        pipeline::effective_sae(&base, self.seed)
    }

    fn prepare_out(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))
    }
}

fn load_matrix(path: &Path) -> Result<EmbeddingMatrix> {
    let (ids, data) = artifacts::read_vectors(path)?;
    let meta_path = artifacts::meta_path_for(path);
    let source = if meta_path.is_file() {
        artifacts::read_meta(&meta_path)?.source
    } else {
        EmbeddingSource::External
    };
    EmbeddingMatrix::new(ids, data, source)
}

/// Labels from clusters.json (its `labels` map) or from a bare id → label
/// object, aligned to `ids`.
fn read_labels(path: &Path, ids: &[String]) -> Result<Vec<usize>> {
    let text = artifacts::read_text(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let map = match value.get("labels") {
        Some(inner) if inner.is_object() => inner.clone(),
        _ => value,
    };
    let map: BTreeMap<String, usize> = serde_json::from_value(map).map_err(|e| Error::Parse {
        line: 1,
        message: format!("labels: {e}"),
    })?;
    if let Some(extra) = map.keys().find(|k| !ids.contains(k)) {
        return Err(Error::UnknownId(extra.clone()));
    }
    ids.iter()
        .map(|id| map.get(id).copied().ok_or_else(|| Error::MissingId(id.clone())))
        .collect()
}

fn execute(cli: &Cli, ctx: &Context) -> Result<()> {
    match &cli.command {
        Command::Normalize { input } => {
            let input = match (input, &ctx.config) {
                (Some(p), _) => p.clone(),
                (None, Some(c)) => c.resolve(&c.paths.documents),
                (None, None) => return Err(Error::Config("`normalize` needs --in or --config".into())),
            };
            ctx.prepare_out()?;
            let docs = pipeline::normalize_stage(&input, &ctx.out)?;
            ctx.say(format!("normalized {} documents", docs.len()));
        }
        Command::EmbedHash { input, dim } => {
            let docs = artifacts::read_normalized(&ctx.artifact(input, artifacts::NORMALIZED))?;
            let dim = dim.unwrap_or_else(|| {
                ctx.config
                    .as_ref()
                    .map_or(ras_core::embed::DEFAULT_DIM, |c| c.sae.input_dim)
            });
            ctx.prepare_out()?;
            let m = pipeline::embed_hash_stage(&docs, dim, ctx.seed, &ctx.out)?;
            ctx.say(format!("embedded {} documents into {} dimensions", m.len(), m.dim()));
        }
        Command::Train { input } => {
            let m = load_matrix(&ctx.artifact(input, artifacts::EMBEDDINGS))?;
            ctx.prepare_out()?;
            let trained = pipeline::train_stage(&m, &ctx.sae(), &ctx.out)?;
            if let Some(ft) = trained.log.finetune().and_then(|p| p.epochs.last()) {
                ctx.say(format!(
                    "trained; final fine-tune loss {:.6}, accuracy {:.4}",
                    ft.loss, ft.accuracy
                ));
            }
        }
        Command::Encode { input, model, scaler } => {
            let m = load_matrix(&ctx.artifact(input, artifacts::EMBEDDINGS))?;
            let model = artifacts::read_model(&ctx.artifact(model, artifacts::MODEL))?;
            let scaler = artifacts::read_scaler(&ctx.artifact(scaler, artifacts::SCALER))?;
            ctx.prepare_out()?;
            let codes = pipeline::encode_stage(&m, &scaler, &model, &ctx.out)?;
            ctx.say(format!(
                "encoded {} rows into {} dimensions",
                codes.nrows(),
                codes.ncols()
            ));
        }
        Command::Cluster { input, k } => {
            let (ids, codes) = artifacts::read_vectors(&ctx.artifact(input, artifacts::CODES))?;
            let k = match (k, &ctx.config) {
                (Some(k), _) => *k,
                (None, Some(c)) => c.cluster_spec.k(),
                (None, None) => return Err(Error::Config("`cluster` needs --k or --config".into())),
            };
            let options = ctx.config.as_ref().map_or_else(KMeansOptions::default, |c| c.kmeans);
            let top = ctx.config.as_ref().map_or(DEFAULT_TOP, |c| c.top);
            ctx.prepare_out()?;
            let (model, _) = pipeline::cluster_stage(&ids, &codes, k, &options, top, ctx.seed, &ctx.out)?;
            ctx.say(format!(
                "clustered into {k}; sizes {:?}, inertia {:.6}",
                model.cluster_sizes(),
                model.inertia
            ));
        }
        Command::Metrics { codes, labels } => {
            let (ids, codes) = artifacts::read_vectors(&ctx.artifact(codes, artifacts::CODES))?;
            let labels = read_labels(&ctx.artifact(labels, artifacts::CLUSTERS), &ids)?;
            ctx.prepare_out()?;
            let r = pipeline::metrics_stage(&codes, &labels, &ctx.out)?;
            ctx.say(format!(
                "silhouette {:.4}, davies-bouldin {:.4}, dunn {:.4}",
                r.silhouette, r.davies_bouldin, r.dunn
            ));
        }
        Command::Project {
            codes,
            clusters,
            coords,
        } => {
            let (ids, codes) = artifacts::read_vectors(&ctx.artifact(codes, artifacts::CODES))?;
            let clusters = artifacts::read_clusters(&ctx.artifact(clusters, artifacts::CLUSTERS))?;
            let labels = clusters.labels_for(&ids)?;
            let ranking: ClusterRanking = clusters.ranking();
            let names = ctx.config.as_ref().map(|c| c.cluster_spec.labels()).unwrap_or_default();
            let coords = coords.clone().or_else(|| {
                let c = ctx.config.as_ref()?;
                c.paths.coordinates.as_ref().map(|p| c.resolve(p))
            });
            ctx.prepare_out()?;
            let p = pipeline::project_stage(&ids, &codes, &labels, &ranking, &names, coords.as_deref(), &ctx.out)?;
            ctx.say(format!("projected {} points", p.ids.len()));
            if let Some(config) = &ctx.config {
                pipeline::report_from_artifacts(config, &ctx.out)?;
                ctx.say(format!("wrote {}", ctx.out.join(artifacts::REPORT).display()));
            }
        }
        Command::Run => {
            let config = ctx.require_config("run")?;
            let report = pipeline::run_pipeline(config)?;
            let embeddings = match &config.paths.embeddings {
                EmbeddingsInput::Hash => "hash".to_string(),
                EmbeddingsInput::File(p) => p.display().to_string(),
            };
            ctx.say(format!(
                "run complete ({embeddings} embeddings, K = {}): silhouette {:.4}, davies-bouldin {:.4}, dunn {:.4}",
                report.clustering.k, report.metrics.silhouette, report.metrics.davies_bouldin, report.metrics.dunn
            ));
            ctx.say(format!("artifacts in {}", ctx.out.display()));
        }
        Command::Validate { kind, files } => {
            let kind = kind
                .as_deref()
                .map(|k| ArtifactKind::parse(k).ok_or_else(|| Error::Invalid(format!("unknown artifact kind {k:?}"))))
                .transpose()?;
            for file in files {
                let checked = match kind {
                    Some(k) => validate::validate_as(k, file),
                    None => validate::validate_path(file),
                }
                .map_err(|e| Error::InFile {
                    path: file.clone(),
                    source: Box::new(e),
                })?;
                ctx.say(format!(
                    "{}: valid {} ({} records)",
                    file.display(),
                    checked.kind.name(),
                    checked.records
                ));
            }
        }
    }
    Ok(())
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Data | ErrorKind::Io => 2,
        ErrorKind::Numerical => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = Context::from_cli(&cli).and_then(|ctx| execute(&cli, &ctx));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
