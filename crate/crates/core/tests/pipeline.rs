mod common;

use std::fs;
use std::path::Path;

use ras_core::pipeline::{artifacts, run_pipeline, PipelineConfig};
use ras_core::validate;
use ras_core::ErrorKind;

fn leftover_temp_files(dir: &Path) -> Vec<String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|name| name.starts_with(".tmp"))
        .collect()
}

#[test]
fn external_embeddings_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let blobs = common::blobs(15, 3);
    let config = PipelineConfig::load(&common::write_blob_inputs(dir.path(), &blobs, 3, 5)).unwrap();
    let report = run_pipeline(&config).unwrap();
    assert_eq!(report.clustering.k, 3);
    assert_eq!(report.clustering.sizes.iter().sum::<usize>(), 45);
    assert_eq!(report.clustering.labels, ["Sport", "Education", "Else"]);
    for stage in ["normalize", "embed", "train", "encode", "cluster", "metrics", "project"] {
        assert!(report.timings_ms.contains_key(stage), "{stage}");
    }

    let out = dir.path().join("out");
    // The file report leaves timings out unless asked, so reruns are byte-stable.
    let text = fs::read_to_string(out.join(artifacts::REPORT)).unwrap();
    let on_disk: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(on_disk["timings_ms"], serde_json::json!({}));
    assert_eq!(
        artifacts::read_metrics(&out.join(artifacts::METRICS)).unwrap(),
        report.metrics
    );

    // The imported vectors are copied through unchanged.
    let (ids, data) = artifacts::read_vectors(&out.join(artifacts::EMBEDDINGS)).unwrap();
    assert_eq!(ids, blobs.ids);
    assert_eq!(data, blobs.data);
    for (kind, name) in &report.artifacts {
        let checked = validate::validate_path(&out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(checked.kind.name(), kind);
    }
    assert!(leftover_temp_files(&out).is_empty());
}

#[test]
fn misaligned_embeddings_fail_in_the_embed_stage() {
    let dir = tempfile::tempdir().unwrap();
    let blobs = common::blobs(5, 1);
    let config_path = common::write_blob_inputs(dir.path(), &blobs, 2, 0);
    // Same count, but one document the embeddings file knows nothing about.
    let docs = fs::read_to_string(dir.path().join("documents.jsonl")).unwrap();
    fs::write(
        dir.path().join("documents.jsonl"),
        docs.replacen("\"blob-000\"", "\"stray\"", 1),
    )
    .unwrap();

    let err = run_pipeline(&PipelineConfig::load(&config_path).unwrap()).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Data);
    let message = err.to_string();
    assert!(message.starts_with("embed stage failed"), "{message}");
    assert!(message.contains("blob-000") || message.contains("stray"), "{message}");

    let out = dir.path().join("out");
    assert!(out.join(artifacts::NORMALIZED).is_file());
    assert!(!out.join(artifacts::EMBEDDINGS).exists());
    assert!(!out.join(artifacts::REPORT).exists());
    assert!(leftover_temp_files(&out).is_empty());
}

#[test]
fn diverging_training_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blobs = common::blobs(10, 2);
    let config_path = common::write_blob_inputs(dir.path(), &blobs, 5, 0);
    let mut config = PipelineConfig::load(&config_path).unwrap();
    config.sae.learning_rate = 1e300;
    let err = run_pipeline(&config).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Numerical, "{err}");
    assert!(err.to_string().starts_with("train stage failed"), "{err}");
    let out = dir.path().join("out");
    assert!(!out.join(artifacts::MODEL).exists());
    assert!(leftover_temp_files(&out).is_empty());
}

#[test]
fn missing_inputs_are_reported_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let blobs = common::blobs(5, 1);
    let config_path = common::write_blob_inputs(dir.path(), &blobs, 2, 0);
    fs::remove_file(dir.path().join("inputs/embeddings.meta.json")).unwrap();
    let err = run_pipeline(&PipelineConfig::load(&config_path).unwrap()).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Data);
    assert!(err.to_string().contains("embeddings.meta.json"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn config_rejects_unknown_keys_and_bad_values() {
    let base = Path::new("/tmp");
    let ok = r#"{"paths": {"documents": "d.jsonl", "embeddings": "hash", "out_dir": "o"},
                 "cluster_spec": {"topic_labels": ["A", "B"], "include_else": false}}"#;
    let c = PipelineConfig::from_json(ok, base.to_path_buf()).unwrap();
    assert_eq!(c.cluster_spec.k(), 2);
    assert_eq!(c.out_dir(), base.join("o"));
    let unknown = ok.replace("\"out_dir\"", "\"outdir\"");
    assert!(PipelineConfig::from_json(&unknown, base.to_path_buf()).is_err());
    let single = ok.replace(
        "[\"A\", \"B\"], \"include_else\": false",
        "[\"A\"], \"include_else\": false",
    );
    assert_eq!(
        PipelineConfig::from_json(&single, base.to_path_buf())
            .unwrap_err()
            .kind(),
        ErrorKind::Data
    );
}

fn keys(v: &serde_json::Value) -> Vec<String> {
    let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

#[test]
fn shipped_schema_lists_every_config_key() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs");
    let schema: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("config.schema.json")).unwrap()).unwrap();
    let example = root.join("config.example.json");
    let mut config = PipelineConfig::load(&example).unwrap();
    config.paths.embeddings_meta = Some("m.json".into());
    config.paths.coordinates = Some("c.csv".into());
    let full = serde_json::to_value(&config).unwrap();
    let props = &schema["properties"];
    assert_eq!(keys(props), keys(&full));
    for section in ["paths", "cluster_spec", "sae", "kmeans"] {
        assert_eq!(keys(&props[section]["properties"]), keys(&full[section]), "{section}");
    }
}
