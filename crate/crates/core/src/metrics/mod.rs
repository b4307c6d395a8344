//! Internal cluster validity indices: Silhouette, Davies-Bouldin and Dunn.
//!
//! All distances are Euclidean. Labels are arbitrary cluster ids; the number
//! of clusters `k` is the number of distinct label values present.
//!
//! The functions here share one pairwise distance matrix. [`oracle`] holds
//! textually independent direct-from-definition versions used to test them.

pub mod oracle;

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteTerms {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub s: Vec<f64>,
}

impl SilhouetteTerms {
    pub fn score(&self) -> f64 {
        self.s.iter().sum::<f64>() / self.s.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbTerms {
    /// Mean member-to-centroid distance per cluster, in ascending label order.
    pub spread: Vec<f64>,
    /// Centroid distances, `k × k`.
    pub separation: Array2<f64>,
    /// `(spread_i + spread_j) / separation_ij`, zero on the diagonal.
    pub ratio: Array2<f64>,
}

impl DbTerms {
    pub fn score(&self) -> f64 {
        let k = self.spread.len();
        let worst: f64 = (0..k)
            .map(|i| {
                (0..k)
                    .filter(|&j| j != i)
                    .map(|j| self.ratio[[i, j]])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .sum();
        worst / k as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DunnTerms {
    /// Smallest distance between points of different clusters.
    pub inter_min: f64,
    /// Largest distance between points of the same cluster.
    pub diam_max: f64,
}

impl DunnTerms {
    pub fn score(&self) -> Result<f64> {
        match (self.inter_min > 0.0, self.diam_max > 0.0) {
            (_, true) => Ok(self.inter_min / self.diam_max),
            (true, false) => Ok(f64::INFINITY),
            (false, false) => Err(Error::Degenerate("all points coincide; Dunn index is 0/0".into())),
        }
    }
}

/// `metrics.json`. A Dunn value of +∞ is written as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub silhouette: f64,
    pub davies_bouldin: f64,
    #[serde(serialize_with = "ser_dunn", deserialize_with = "de_dunn")]
    pub dunn: f64,
    pub k: usize,
    pub n: usize,
}

fn ser_dunn<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if *v == f64::INFINITY {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_dunn<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
        Repr::Str(s) => Err(serde::de::Error::custom(format!("invalid dunn value {s:?}"))),
    }
}

impl MetricsReport {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.silhouette) {
            return Err(Error::Invalid(format!(
                "silhouette {} outside [-1, 1]",
                self.silhouette
            )));
        }
        if !(self.davies_bouldin.is_finite() && self.davies_bouldin >= 0.0) {
            return Err(Error::Invalid(format!(
                "davies_bouldin {} must be finite and >= 0",
                self.davies_bouldin
            )));
        }
        if self.dunn.is_nan() || self.dunn < 0.0 {
            return Err(Error::Invalid(format!("dunn {} must be >= 0", self.dunn)));
        }
        if self.k < 2 || self.k > self.n {
            return Err(Error::Invalid(format!(
                "k = {} incompatible with n = {}",
                self.k, self.n
            )));
        }
        Ok(())
    }
}

/// Row indices grouped by label, in ascending label order.
struct Partition {
    groups: Vec<Vec<usize>>,
    /// Index into `groups` for every point.
    of_point: Vec<usize>,
}

impl Partition {
    fn new(features: &Array2<f64>, labels: &[usize]) -> Result<Self> {
        if labels.len() != features.nrows() {
            return Err(Error::Dimension {
                context: "labels vs feature rows".into(),
                expected: features.nrows(),
                found: labels.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("metric features".into()));
        }
        let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &l) in labels.iter().enumerate() {
            by_label.entry(l).or_default().push(i);
        }
        let groups: Vec<Vec<usize>> = by_label.into_values().collect();
        let mut of_point = vec![0; labels.len()];
        for (g, members) in groups.iter().enumerate() {
            for &i in members {
                of_point[i] = g;
            }
        }
        Ok(Self { groups, of_point })
    }

    fn k(&self) -> usize {
        self.groups.len()
    }

    fn require_k(&self, metric: &'static str) -> Result<()> {
        if self.k() < 2 {
            return Err(Error::Undefined {
                metric,
                reason: format!("needs at least 2 clusters, labels contain {}", self.k()),
            });
        }
        Ok(())
    }
}

fn euclidean(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn pairwise(features: &Array2<f64>) -> Array2<f64> {
    let n = features.nrows();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = euclidean(features.row(i), features.row(j));
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    d
}

fn silhouette_from(dist: &Array2<f64>, part: &Partition) -> SilhouetteTerms {
    let n = dist.nrows();
    let k = part.k();
    let sizes: Vec<usize> = part.groups.iter().map(Vec::len).collect();
    let mut terms = SilhouetteTerms {
        a: vec![0.0; n],
        b: vec![0.0; n],
        s: vec![0.0; n],
    };
    let mut sums = vec![0.0; k];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (j, &d) in dist.row(i).iter().enumerate() {
            sums[part.of_point[j]] += d;
        }
        let own = part.of_point[i];
        let b = (0..k)
            .filter(|&g| g != own)
            .map(|g| sums[g] / sizes[g] as f64)
            .fold(f64::INFINITY, f64::min);
        terms.b[i] = b;
        if sizes[own] == 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        terms.a[i] = a;
        let denom = a.max(b);
        terms.s[i] = if denom > 0.0 { (b - a) / denom } else { 0.0 };
    }
    terms
}

fn check_silhouette_k(part: &Partition, n: usize) -> Result<()> {
    let k = part.k();
    if k < 2 || k + 1 > n {
        return Err(Error::Undefined {
            metric: "silhouette",
            reason: format!("needs 2 <= k <= n - 1, got k = {k}, n = {n}"),
        });
    }
    Ok(())
}

pub fn silhouette_terms(features: &Array2<f64>, labels: &[usize]) -> Result<SilhouetteTerms> {
    let part = Partition::new(features, labels)?;
    check_silhouette_k(&part, features.nrows())?;
    Ok(silhouette_from(&pairwise(features), &part))
}

/// Mean over points of `(b - a) / max(a, b)`, where `a` is the mean distance to
/// the point's own cluster and `b` the smallest mean distance to another
/// cluster. Points alone in their cluster score 0.
pub fn silhouette_score(features: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    Ok(silhouette_terms(features, labels)?.score())
}

fn db_from(features: &Array2<f64>, part: &Partition) -> Result<DbTerms> {
    let k = part.k();
    let centroids: Vec<Array1<f64>> = part
        .groups
        .iter()
        .map(|g| features.select(Axis(0), g).mean_axis(Axis(0)).expect("non-empty group"))
        .collect();
    let spread: Vec<f64> = part
        .groups
        .iter()
        .zip(&centroids)
        .map(|(g, c)| g.iter().map(|&i| euclidean(features.row(i), c.view())).sum::<f64>() / g.len() as f64)
        .collect();
    let mut separation = Array2::zeros((k, k));
    let mut ratio = Array2::zeros((k, k));
    for i in 0..k {
        for j in (i + 1)..k {
            let d = euclidean(centroids[i].view(), centroids[j].view());
            if d == 0.0 {
                return Err(Error::Degenerate(format!(
                    "clusters {i} and {j} share a centroid; Davies-Bouldin ratio is undefined"
                )));
            }
            separation[[i, j]] = d;
            separation[[j, i]] = d;
            let r = (spread[i] + spread[j]) / d;
            ratio[[i, j]] = r;
            ratio[[j, i]] = r;
        }
    }
    Ok(DbTerms {
        spread,
        separation,
        ratio,
    })
}

pub fn davies_bouldin_terms(features: &Array2<f64>, labels: &[usize]) -> Result<DbTerms> {
    let part = Partition::new(features, labels)?;
    part.require_k("davies-bouldin")?;
    db_from(features, &part)
}

/// Mean over clusters of the worst `(S_i + S_j) / d(c_i, c_j)`, with `S` the
/// mean member-to-centroid distance.
pub fn davies_bouldin(features: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    Ok(davies_bouldin_terms(features, labels)?.score())
}

fn dunn_from(dist: &Array2<f64>, part: &Partition) -> DunnTerms {
    let n = dist.nrows();
    let mut inter_min = f64::INFINITY;
    let mut diam_max = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist[[i, j]];
            if part.of_point[i] == part.of_point[j] {
                diam_max = diam_max.max(d);
            } else {
                inter_min = inter_min.min(d);
            }
        }
    }
    DunnTerms { inter_min, diam_max }
}

pub fn dunn_terms(features: &Array2<f64>, labels: &[usize]) -> Result<DunnTerms> {
    let part = Partition::new(features, labels)?;
    part.require_k("dunn")?;
    Ok(dunn_from(&pairwise(features), &part))
}

/// Single-linkage separation over largest diameter; `+∞` when every cluster
/// is a single location.
pub fn dunn_index(features: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    dunn_terms(features, labels)?.score()
}

/// All three indices, sharing one distance matrix.
pub fn evaluate(features: &Array2<f64>, labels: &[usize]) -> Result<MetricsReport> {
    let part = Partition::new(features, labels)?;
    check_silhouette_k(&part, features.nrows())?;
    let dist = pairwise(features);
    Ok(MetricsReport {
        silhouette: silhouette_from(&dist, &part).score(),
        davies_bouldin: db_from(features, &part)?.score(),
        dunn: dunn_from(&dist, &part).score()?,
        k: part.k(),
        n: features.nrows(),
    })
}
