#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Latent dimension of the synthetic blobs before lifting.
pub const LATENT: usize = 8;
pub const LIFTED: usize = 768;
/// Distance between any two blob centres, in units of the per-axis noise.
pub const SEPARATION: f64 = 25.0;

pub struct Blobs {
    pub ids: Vec<String>,
    pub data: Array2<f64>,
    pub truth: Vec<usize>,
}

/// `dim × cols` matrix with orthonormal columns (Gram-Schmidt on Gaussian
/// draws).
pub fn random_isometry(dim: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut q = Array2::<f64>::zeros((dim, cols));
    for c in 0..cols {
        let mut v: Array1<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        for p in 0..c {
            let u = q.column(p).to_owned();
            let proj = v.dot(&u);
            v.scaled_add(-proj, &u);
        }
        let n = v.dot(&v).sqrt();
        q.column_mut(c).assign(&(v / n));
    }
    q
}

/// `per_blob × 3` points around the corners of an equilateral triangle with
/// side `SEPARATION`, unit Gaussian noise on every latent axis, lifted to
/// `LIFTED` dimensions.
pub fn blobs(per_blob: usize, seed: u64) -> Blobs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = SEPARATION * 3f64.sqrt() / 2.0;
    let centres = [[0.0, 0.0], [SEPARATION, 0.0], [SEPARATION / 2.0, h]];
    let n = per_blob * 3;
    let mut latent = Array2::<f64>::zeros((n, LATENT));
    let mut truth = Vec::with_capacity(n);
    for i in 0..n {
        let b = i % 3;
        truth.push(b);
        for j in 0..LATENT {
            let noise: f64 = StandardNormal.sample(&mut rng);
            let centre = if j < 2 { centres[b][j] } else { 0.0 };
            latent[[i, j]] = centre + noise;
        }
    }
    let lift = random_isometry(LIFTED, LATENT, &mut rng);
    Blobs {
        ids: (0..n).map(|i| format!("blob-{i:03}")).collect(),
        data: latent.dot(&lift.t()),
        truth,
    }
}

/// Random clustering instance: `n` points in `d` dimensions, uniform in
/// `[-10, 10]`, labels `0..k` with every label used at least once.
pub fn labelled_instance(n: usize, d: usize, k: usize, rng: &mut ChaCha8Rng) -> (Array2<f64>, Vec<usize>) {
    use rand::seq::SliceRandom;
    use rand::Rng;
    let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-10.0..10.0));
    let mut labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
    labels.shuffle(rng);
    (x, labels)
}

/// A small random autoencoder and batch on which the loss is smooth: biases
/// are drawn from ±0.1 and draws whose ReLU pre-activations come within
/// `1e-3` of the kink are skipped (the finite difference is not an oracle
/// there). Returns the model, the batch and the number of skipped draws.
pub fn smooth_gradcheck_case(seed: u64) -> (ras_core::sae::SaeModel, Array2<f64>, usize) {
    use rand::Rng;
    use ras_core::sae::network::{forward_all, Activation};
    use ras_core::sae::{init_sae, SaeConfig};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0.. {
        let input_dim = rng.random_range(4..=16);
        let depth = rng.random_range(1..=3);
        let mut layer_dims = Vec::new();
        let mut width = input_dim;
        while layer_dims.len() < depth && width > 1 {
            width = rng.random_range(1..width);
            layer_dims.push(width);
        }
        let config = SaeConfig {
            input_dim,
            layer_dims,
            seed: rng.random(),
            ..SaeConfig::default()
        };
        let mut model = init_sae(&config).unwrap();
        for layer in model.encoder.iter_mut().chain(model.decoder.iter_mut()) {
            layer.bias.mapv_inplace(|_| rng.random_range(-0.1..0.1));
        }
        let rows = rng.random_range(1..=4);
        let batch = Array2::from_shape_fn((rows, input_dim), |_| rng.random::<f64>());

        let layers = model.layers();
        let outputs = forward_all(&layers, &batch);
        let near_kink = layers.iter().zip(&outputs).any(|(layer, input)| {
            layer.activation == Activation::Relu
                && (input.dot(&layer.weights) + &layer.bias).iter().any(|z| z.abs() < 1e-3)
        });
        if !near_kink {
            return (model, batch, attempt);
        }
    }
    unreachable!()
}

/// Minimum within-cluster sum of squares over every split into two non-empty
/// groups, by enumeration. Point 0 is pinned to the first group.
pub fn best_two_partition_inertia(x: &Array2<f64>) -> f64 {
    let n = x.nrows();
    assert!((2..=20).contains(&n));
    let sse = |members: &[usize]| -> f64 {
        let d = x.ncols();
        let mut mean = vec![0.0; d];
        for &i in members {
            for j in 0..d {
                mean[j] += x[[i, j]] / members.len() as f64;
            }
        }
        members
            .iter()
            .map(|&i| (0..d).map(|j| (x[[i, j]] - mean[j]).powi(2)).sum::<f64>())
            .sum()
    };
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << (n - 1)) {
        let (mut a, mut b) = (vec![0], Vec::new());
        for i in 1..n {
            if mask & (1 << (i - 1)) != 0 {
                b.push(i);
            } else {
                a.push(i);
            }
        }
        if b.is_empty() {
            continue;
        }
        best = best.min(sse(&a) + sse(&b));
    }
    best
}

/// `n × d` points, uniform in `[-5, 5]`.
pub fn uniform_points(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    use rand::Rng;
    Array2::from_shape_fn((n, d), |_| rng.random_range(-5.0..5.0))
}

/// The n ≤ 8, d ≤ 2 instance drawn from generator seed `seed`.
pub fn small_two_means_instance(seed: u64) -> Array2<f64> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=8);
    let d = rng.random_range(1..=2);
    uniform_points(n, d, &mut rng)
}

/// The four rule-application examples for `preprocess_text`.
pub const PREPROCESS_EXAMPLES: [(&str, &str); 4] = [
    ("زيارة https://example.com الآن", "زياره الان"),
    ("Sports 123 الرياضة!", "الرياضه"),
    ("مُدَرِّسَة", "مدرسه"),
    ("", ""),
];

fn unescape(field: &str) -> String {
    let mut out = String::new();
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('\\') => out.push('\\'),
            Some('u') => {
                assert_eq!(chars.next(), Some('{'), "malformed \\u escape in {field:?}");
                let hex: String = chars.by_ref().take_while(|&c| c != '}').collect();
                let code = u32::from_str_radix(&hex, 16).expect("hex code point");
                out.push(char::from_u32(code).expect("valid code point"));
            }
            other => panic!("unknown escape {other:?} in {field:?}"),
        }
    }
    out
}

/// `(line, input, expected)` rows of `tests/fixtures/normalization.tsv`.
pub fn normalization_fixture() -> Vec<(usize, String, String)> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/normalization.tsv");
    let text = std::fs::read_to_string(&path).expect("normalization fixture");
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.is_empty())
        .map(|(i, l)| {
            let (input, expected) = l.split_once('\t').unwrap_or_else(|| panic!("line {}: no tab", i + 1));
            (i + 1, unescape(input), unescape(expected))
        })
        .collect()
}

/// Writes `blobs` as pipeline inputs under `dir`: one placeholder document per
/// point, the vectors as an external `embeddings.jsonl` with its meta, and a
/// `config.json` with K = 3 (two topics plus Else). Returns the config path.
pub fn write_blob_inputs(dir: &std::path::Path, blobs: &Blobs, epochs: usize, seed: u64) -> std::path::PathBuf {
    use ras_core::embed::{EmbeddingMatrix, EmbeddingSource};
    use ras_core::ingest::{Document, Vertical};
    use ras_core::pipeline::artifacts;

    let titles = ["نتيجة المباراة", "الجامعة والمدرسة", "تقنية المعلومات"];
    let docs: Vec<Document> = blobs
        .ids
        .iter()
        .zip(&blobs.truth)
        .map(|(id, &t)| Document {
            id: id.clone(),
            query_id: "q1".into(),
            vertical: Vertical::Web,
            title: titles[t].into(),
            link: format!("https://example.com/{id}"),
            snippet: None,
            description: None,
        })
        .collect();
    let mut buf = Vec::new();
    ras_core::ingest::write_documents(&mut buf, &docs).unwrap();
    std::fs::write(dir.join("documents.jsonl"), buf).unwrap();

    let inputs = dir.join("inputs");
    std::fs::create_dir_all(&inputs).unwrap();
    let m = EmbeddingMatrix::new(blobs.ids.clone(), blobs.data.clone(), EmbeddingSource::External).unwrap();
    artifacts::write_embeddings(&inputs, &m).unwrap();

    let config = serde_json::json!({
        "paths": {
            "documents": "documents.jsonl",
            "embeddings": "inputs/embeddings.jsonl",
            "out_dir": "out"
        },
        "cluster_spec": {"topic_labels": ["Sport", "Education"], "include_else": true},
        "sae": {"epochs": epochs},
        "seed": seed
    });
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}
