//! K-means over autoencoder codes and cosine ranking of cluster members.

use std::collections::{BTreeMap, HashSet};

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Topic labels of a query. K is one cluster per topic, plus one for results
/// that belong to none of them when `include_else` is set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub topic_labels: Vec<String>,
    #[serde(default = "default_true")]
    pub include_else: bool,
}

fn default_true() -> bool {
    true
}

impl ClusterSpec {
    pub fn new(topics: &[&str], include_else: bool) -> Result<Self> {
        let spec = Self {
            topic_labels: topics.iter().map(|s| s.to_string()).collect(),
            include_else,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn k(&self) -> usize {
        self.topic_labels.len() + usize::from(self.include_else)
    }

    /// Annotation for each cluster index; "Else" last when enabled. Cluster
    /// indices carry no supervised meaning, so these are display names only.
    pub fn labels(&self) -> Vec<String> {
        let mut labels = self.topic_labels.clone();
        if self.include_else {
            labels.push("Else".into());
        }
        labels
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for label in &self.topic_labels {
            if label.is_empty() || !seen.insert(label) {
                return Err(Error::Config(format!("topic label {label:?} is empty or repeated")));
            }
        }
        if self.k() < 2 {
            return Err(Error::Config(format!(
                "cluster spec yields K = {}, need at least 2",
                self.k()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 300,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub centroids: Array2<f64>,
    pub labels: Vec<usize>,
    pub inertia: f64,
    /// Lloyd iterations of the winning restart.
    pub iterations_run: usize,
    pub restarts_run: usize,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.centroids.nrows()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: ArrayView1<f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.rows().into_iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn assign(features: &Array2<f64>, centroids: &Array2<f64>) -> Vec<usize> {
    features.rows().into_iter().map(|p| nearest(p, centroids).0).collect()
}

/// Greedy k-means++ seeding: first centre uniform, then for each next centre
/// `2 + ln k` candidates are drawn with probability proportional to the squared
/// distance to the closest centre so far, and the candidate giving the lowest
/// total squared distance is kept.
fn plus_plus<R: Rng>(features: &Array2<f64>, k: usize, rng: &mut R) -> Array2<f64> {
    let n = features.nrows();
    let trials = 2 + (k as f64).ln().floor() as usize;
    let mut centroids = Array2::zeros((k, features.ncols()));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&features.row(first));
    let mut closest: Vec<f64> = features
        .rows()
        .into_iter()
        .map(|p| sq_dist(p, features.row(first)))
        .collect();
    for c in 1..k {
        let total: f64 = closest.iter().sum();
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for _ in 0..trials {
            let pick = if total > 0.0 {
                weighted_pick(&closest, rng.random::<f64>() * total)
            } else {
                rng.random_range(0..n)
            };
            let updated: Vec<f64> = features
                .rows()
                .into_iter()
                .zip(&closest)
                .map(|(p, &d)| d.min(sq_dist(p, features.row(pick))))
                .collect();
            let potential: f64 = updated.iter().sum();
            if best.as_ref().is_none_or(|b| potential < b.0) {
                best = Some((potential, pick, updated));
            }
        }
        let (_, pick, updated) = best.expect("at least one trial");
        centroids.row_mut(c).assign(&features.row(pick));
        closest = updated;
    }
    centroids
}

fn weighted_pick(weights: &[f64], target: f64) -> usize {
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if w > 0.0 && acc > target {
            return i;
        }
    }
    // Rounding can leave `acc` just short of `target`.
    weights.iter().rposition(|&w| w > 0.0).expect("positive total")
}

/// Gives every empty cluster the point farthest from its own centroid, taken
/// from a cluster that has more than one member.
fn repair_empty(features: &Array2<f64>, centroids: &mut Array2<f64>, labels: &mut [usize]) {
    let k = centroids.nrows();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = -1.0;
        for (i, p) in features.rows().into_iter().enumerate() {
            if sizes[labels[i]] < 2 {
                continue;
            }
            let d = sq_dist(p, centroids.row(labels[i]));
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let i = far.expect("k <= n leaves a cluster with two members");
        sizes[labels[i]] -= 1;
        labels[i] = c;
        sizes[c] = 1;
        centroids.row_mut(c).assign(&features.row(i));
    }
}

fn means(features: &Array2<f64>, labels: &[usize], k: usize) -> Array2<f64> {
    let mut sums = Array2::zeros((k, features.ncols()));
    let mut counts = vec![0usize; k];
    for (p, &l) in features.rows().into_iter().zip(labels) {
        let mut row = sums.row_mut(l);
        row += &p;
        counts[l] += 1;
    }
    for (mut row, &count) in sums.rows_mut().into_iter().zip(&counts) {
        row /= count as f64;
    }
    sums
}

pub fn inertia(features: &Array2<f64>, centroids: &Array2<f64>, labels: &[usize]) -> f64 {
    features
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(p, &l)| sq_dist(p, centroids.row(l)))
        .sum()
}

/// Recomputes the centroid of cluster `c` from its members.
fn refresh_centroid(features: &Array2<f64>, centroids: &mut Array2<f64>, labels: &[usize], c: usize) {
    let mut sum = ndarray::Array1::<f64>::zeros(features.ncols());
    let mut count = 0usize;
    for (p, _) in features.rows().into_iter().zip(labels).filter(|(_, &l)| l == c) {
        sum += &p;
        count += 1;
    }
    centroids.row_mut(c).assign(&(sum / count as f64));
}

/// Hartigan single-point transfers after Lloyd has settled. Moving `x` from
/// cluster `a` (size `m`) to `b` (size `q`) changes the sum of squares by
/// `q/(q+1)·|x-c_b|² - m/(m-1)·|x-c_a|²`; points are moved while that is
/// negative. Lloyd stops at any partition where every point is nearest its
/// own centroid, which can still leave such improving moves; a partition with
/// none left is also stable under reassignment.
fn transfer(features: &Array2<f64>, centroids: &mut Array2<f64>, labels: &mut [usize], max_passes: usize) {
    let k = centroids.nrows();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for _ in 0..max_passes {
        let mut moved = false;
        for i in 0..features.nrows() {
            let a = labels[i];
            if sizes[a] < 2 {
                continue;
            }
            let m = sizes[a] as f64;
            let removal = m / (m - 1.0) * sq_dist(features.row(i), centroids.row(a));
            let mut best = None;
            let mut best_cost = removal * (1.0 - 1e-12);
            for b in (0..k).filter(|&b| b != a) {
                let q = sizes[b] as f64;
                let cost = q / (q + 1.0) * sq_dist(features.row(i), centroids.row(b));
                if cost < best_cost {
                    best_cost = cost;
                    best = Some(b);
                }
            }
            if let Some(b) = best {
                labels[i] = b;
                sizes[a] -= 1;
                sizes[b] += 1;
                refresh_centroid(features, centroids, labels, a);
                refresh_centroid(features, centroids, labels, b);
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
}

struct Run {
    centroids: Array2<f64>,
    labels: Vec<usize>,
    inertia: f64,
    iterations: usize,
}

fn lloyd(features: &Array2<f64>, mut centroids: Array2<f64>, opts: &KMeansOptions) -> Run {
    let k = centroids.nrows();
    let mut labels = assign(features, &centroids);
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        repair_empty(features, &mut centroids, &mut labels);
        let updated = means(features, &labels, k);
        let shift = updated
            .rows()
            .into_iter()
            .zip(centroids.rows())
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        let reassigned = assign(features, &centroids);
        let stable = reassigned == labels;
        labels = reassigned;
        // Stopping only on a stable assignment keeps the returned centroids
        // equal to the means of the returned labels.
        if shift < opts.tol && stable {
            break;
        }
    }
    repair_empty(features, &mut centroids, &mut labels);
    transfer(features, &mut centroids, &mut labels, opts.max_iter);
    let inertia = inertia(features, &centroids, &labels);
    Run {
        centroids,
        labels,
        inertia,
        iterations,
    }
}

/// Lloyd's algorithm from k-means++ seeds, refined by single-point
/// transfers, keeping the restart with the lowest inertia (earliest restart on ties). Restart `r` draws from stream
/// `r` of `seed`.
pub fn kmeans_fit(features: &Array2<f64>, k: usize, seed: u64, opts: &KMeansOptions) -> Result<ClusterModel> {
    let n = features.nrows();
    if k < 2 {
        return Err(Error::Invalid(format!("K = {k} < 2")));
    }
    if k > n {
        return Err(Error::Invalid(format!("K = {k} exceeds the {n} points")));
    }
    if opts.restarts == 0 || opts.max_iter == 0 || opts.tol.is_nan() || opts.tol < 0.0 {
        return Err(Error::Config("restarts and max_iter must be >= 1, tol >= 0".into()));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("clustering features".into()));
    }
    let mut best: Option<Run> = None;
    for restart in 0..opts.restarts {
        let mut rng = seed::rng(seed, restart as u64);
        let run = lloyd(features, plus_plus(features, k, &mut rng), opts);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    Ok(ClusterModel {
        centroids: best.centroids,
        labels: best.labels,
        inertia: best.inertia,
        iterations_run: best.iterations,
        restarts_run: opts.restarts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedMember {
    pub id: String,
    pub cos: f64,
}

/// Per cluster, its best members by cosine similarity to the centroid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusterRanking {
    pub clusters: Vec<Vec<RankedMember>>,
}

impl ClusterRanking {
    /// 1-based position of `id` in its cluster's list.
    pub fn rank_of(&self, cluster: usize, id: &str) -> Option<usize> {
        self.clusters
            .get(cluster)?
            .iter()
            .position(|m| m.id == id)
            .map(|p| p + 1)
    }
}

/// Cosine similarity, 0 when either vector is zero. Clamped to `[-1, 1]`.
pub fn cosine(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let na = a.dot(&a).sqrt();
    let nb = b.dot(&b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(&b) / (na * nb)).clamp(-1.0, 1.0)
}

pub const DEFAULT_TOP: usize = 10;

/// Sorts each cluster's members by cosine to the model centroid, descending,
/// ties by id, and keeps the first `top`.
pub fn rank_members(
    features: &Array2<f64>,
    model: &ClusterModel,
    ids: &[String],
    top: usize,
) -> Result<ClusterRanking> {
    if ids.len() != features.nrows() || model.labels.len() != features.nrows() {
        return Err(Error::Dimension {
            context: "ranking ids/labels vs features".into(),
            expected: features.nrows(),
            found: ids.len().min(model.labels.len()),
        });
    }
    if model.centroids.ncols() != features.ncols() {
        return Err(Error::Dimension {
            context: "centroid width".into(),
            expected: features.ncols(),
            found: model.centroids.ncols(),
        });
    }
    let mut clusters: Vec<Vec<RankedMember>> = vec![Vec::new(); model.k()];
    for (i, (&label, id)) in model.labels.iter().zip(ids).enumerate() {
        clusters[label].push(RankedMember {
            id: id.clone(),
            cos: cosine(features.row(i), model.centroids.row(label)),
        });
    }
    for members in &mut clusters {
        members.sort_by(|a, b| b.cos.total_cmp(&a.cos).then_with(|| a.id.cmp(&b.id)));
        members.truncate(top);
    }
    Ok(ClusterRanking { clusters })
}

/// `clusters.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClustersFile {
    pub k: usize,
    pub labels: BTreeMap<String, usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    #[serde(default)]
    pub iterations_run: usize,
    #[serde(default)]
    pub restarts_run: usize,
    pub top: BTreeMap<String, Vec<RankedMember>>,
}

impl ClustersFile {
    pub fn new(model: &ClusterModel, ids: &[String], ranking: &ClusterRanking) -> Self {
        Self {
            k: model.k(),
            labels: ids.iter().cloned().zip(model.labels.iter().copied()).collect(),
            centroids: model.centroids.rows().into_iter().map(|r| r.to_vec()).collect(),
            inertia: model.inertia,
            iterations_run: model.iterations_run,
            restarts_run: model.restarts_run,
            top: ranking
                .clusters
                .iter()
                .enumerate()
                .map(|(c, members)| (c.to_string(), members.clone()))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.centroids.len() != self.k {
            return Err(Error::Dimension {
                context: "clusters.json centroids".into(),
                expected: self.k,
                found: self.centroids.len(),
            });
        }
        let width = self.centroids.first().map_or(0, Vec::len);
        if self.centroids.iter().any(|c| c.len() != width) {
            return Err(Error::Invalid("clusters.json centroids differ in width".into()));
        }
        if self.centroids.iter().flatten().any(|v| !v.is_finite()) || !(self.inertia.is_finite() && self.inertia >= 0.0)
        {
            return Err(Error::NonFinite("clusters.json".into()));
        }
        for (id, &label) in &self.labels {
            if label >= self.k {
                return Err(Error::Invalid(format!(
                    "label {label} of {id:?} has no centroid (k = {})",
                    self.k
                )));
            }
        }
        for (cluster, members) in &self.top {
            let index: usize = cluster
                .parse()
                .map_err(|_| Error::Invalid(format!("top key {cluster:?} is not a cluster index")))?;
            if index >= self.k {
                return Err(Error::Invalid(format!("top list for missing cluster {index}")));
            }
            for m in members {
                if self.labels.get(&m.id) != Some(&index) {
                    return Err(Error::Invalid(format!(
                        "ranked id {:?} is not a member of cluster {index}",
                        m.id
                    )));
                }
                if !(-1.0..=1.0).contains(&m.cos) {
                    return Err(Error::Invalid(format!("cosine {} out of range", m.cos)));
                }
            }
            if members.windows(2).any(|w| w[0].cos < w[1].cos) {
                return Err(Error::Invalid(format!("top list of cluster {index} is not sorted")));
            }
        }
        Ok(())
    }

    /// Labels aligned to `ids`.
    pub fn labels_for(&self, ids: &[String]) -> Result<Vec<usize>> {
        let wanted: HashSet<&str> = ids.iter().map(String::as_str).collect();
        if let Some(extra) = self.labels.keys().find(|id| !wanted.contains(id.as_str())) {
            return Err(Error::UnknownId(extra.clone()));
        }
        ids.iter()
            .map(|id| self.labels.get(id).copied().ok_or_else(|| Error::MissingId(id.clone())))
            .collect()
    }

    pub fn ranking(&self) -> ClusterRanking {
        let mut clusters = vec![Vec::new(); self.k];
        for (cluster, members) in &self.top {
            if let Ok(i) = cluster.parse::<usize>() {
                if i < self.k {
                    clusters[i] = members.clone();
                }
            }
        }
        ClusterRanking { clusters }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn column(values: &[f64]) -> Array2<f64> {
        Array2::from_shape_vec((values.len(), 1), values.to_vec()).unwrap()
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("d{i:02}")).collect()
    }

    #[test]
    fn table_k_derivation() {
        assert_eq!(ClusterSpec::new(&["Sport", "Education"], true).unwrap().k(), 3);
        let q4 = ClusterSpec::new(&["Sport", "Education", "Information Technology"], true).unwrap();
        assert_eq!(q4.k(), 4);
        assert_eq!(q4.labels().last().unwrap(), "Else");
        assert_eq!(
            ClusterSpec::new(&["Sport", "Education", "Information Technology"], false)
                .unwrap()
                .k(),
            3
        );
        assert!(ClusterSpec::new(&["Sport"], false).is_err());
        assert!(ClusterSpec::new(&["Sport", "Sport"], true).is_err());
    }

    #[test]
    fn one_dimensional_two_clusters() {
        // Brute force over the 7 two-partitions of 4 points: {0, 0.1} | {10, 10.1}
        // is optimal with inertia 4 * 0.05^2 = 0.01.
        let x = column(&[0.0, 0.1, 10.0, 10.1]);
        let model = kmeans_fit(&x, 2, 3, &KMeansOptions::default()).unwrap();
        assert_eq!(model.labels[0], model.labels[1]);
        assert_eq!(model.labels[2], model.labels[3]);
        assert_ne!(model.labels[0], model.labels[2]);
        let mut cs: Vec<f64> = model.centroids.iter().copied().collect();
        cs.sort_by(f64::total_cmp);
        assert!((cs[0] - 0.05).abs() < 1e-12 && (cs[1] - 10.05).abs() < 1e-12);
        assert!((model.inertia - 0.01).abs() < 1e-12);
        assert_eq!(model.restarts_run, 10);
    }

    #[test]
    fn k_equals_n_is_exact() {
        let x = array![[0.0, 1.0], [2.0, 2.0], [5.0, -1.0], [3.0, 3.0]];
        let model = kmeans_fit(&x, 4, 0, &KMeansOptions::default()).unwrap();
        assert_eq!(model.inertia, 0.0);
        assert_eq!(model.cluster_sizes(), vec![1; 4]);
    }

    #[test]
    fn duplicate_points_are_repaired_into_nonempty_clusters() {
        let x = array![[1.0], [1.0], [1.0], [2.0]];
        let model = kmeans_fit(&x, 3, 5, &KMeansOptions::default()).unwrap();
        assert!(model.cluster_sizes().iter().all(|&s| s >= 1));
        let x = Array2::from_elem((4, 2), 3.0);
        let model = kmeans_fit(&x, 2, 5, &KMeansOptions::default()).unwrap();
        assert_eq!(model.cluster_sizes().iter().sum::<usize>(), 4);
        assert!(model.cluster_sizes().iter().all(|&s| s >= 1));
        assert_eq!(model.inertia, 0.0);
    }

    #[test]
    fn argument_errors() {
        let x = column(&[0.0, 1.0, 2.0]);
        let opts = KMeansOptions::default();
        assert!(kmeans_fit(&x, 1, 0, &opts).is_err());
        assert!(kmeans_fit(&x, 4, 0, &opts).is_err());
        assert!(kmeans_fit(&column(&[0.0, f64::NAN, 1.0]), 2, 0, &opts).is_err());
        assert!(kmeans_fit(&x, 2, 0, &KMeansOptions { restarts: 0, ..opts }).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let x = Array2::from_shape_fn((40, 3), |(i, j)| ((i * 13 + j * 7) % 17) as f64);
        let opts = KMeansOptions::default();
        assert_eq!(
            kmeans_fit(&x, 3, 8, &opts).unwrap(),
            kmeans_fit(&x, 3, 8, &opts).unwrap()
        );
    }

    #[test]
    fn singleton_cluster_ranks_with_cosine_one() {
        let x = array![[3.0, 4.0], [-10.0, -10.0], [-10.0, -11.0]];
        let model = kmeans_fit(&x, 2, 1, &KMeansOptions::default()).unwrap();
        let ranking = rank_members(&x, &model, &ids(3), DEFAULT_TOP).unwrap();
        let single = &ranking.clusters[model.labels[0]];
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].id, "d00");
        assert!((single[0].cos - 1.0).abs() < 1e-15);
    }

    #[test]
    fn large_cluster_keeps_top_ten() {
        let x = Array2::from_shape_fn((30, 2), |(i, j)| {
            if i < 25 {
                1.0 + (i * (j + 1)) as f64 * 0.01
            } else {
                -50.0 - j as f64
            }
        });
        let model = kmeans_fit(&x, 2, 0, &KMeansOptions::default()).unwrap();
        assert_eq!(model.cluster_sizes().iter().max(), Some(&25));
        let ranking = rank_members(&x, &model, &ids(30), DEFAULT_TOP).unwrap();
        let big = &ranking.clusters[model.labels[0]];
        assert_eq!(big.len(), 10);
        assert!(big.windows(2).all(|w| w[0].cos >= w[1].cos));
    }

    #[test]
    fn hand_cosine_ranking() {
        // centroid (0.8, 0.4), |c| = sqrt(0.8) = 0.894427...
        // cos((1,0), c) = 0.8 / 0.894427 = 2/sqrt(5)
        // cos((0.6,0.8), c) = (0.48 + 0.32) / 0.894427 = 2/sqrt(5)
        // The two tie; the id order decides.
        let x = array![[1.0, 0.0], [0.6, 0.8]];
        let model = ClusterModel {
            centroids: array![[0.8, 0.4], [9.0, 9.0]],
            labels: vec![0, 0],
            inertia: 0.0,
            iterations_run: 0,
            restarts_run: 0,
        };
        let expected = 2.0 / 5f64.sqrt();
        let ids = vec!["a".to_string(), "b".to_string()];
        let ranking = rank_members(&x, &model, &ids, DEFAULT_TOP).unwrap();
        let list = &ranking.clusters[0];
        assert!(list.iter().all(|m| (m.cos - expected).abs() < 1e-12));
        assert!((expected - 0.894427191).abs() < 1e-9);
        assert_eq!(list.len(), 2);
        assert!(ranking.clusters[1].is_empty());
    }

    #[test]
    fn exact_ties_rank_by_id() {
        let x = array![[0.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        let model = ClusterModel {
            centroids: array![[1.0, 1.0]],
            labels: vec![0, 0, 0],
            inertia: 0.0,
            iterations_run: 0,
            restarts_run: 0,
        };
        let ids = vec!["c".to_string(), "b".to_string(), "a".to_string()];
        let ranking = rank_members(&x, &model, &ids, DEFAULT_TOP).unwrap();
        let order: Vec<_> = ranking.clusters[0].iter().map(|m| m.id.as_str()).collect();
        assert_eq!(order, ["a", "b", "c"]);
    }

    #[test]
    fn zero_vectors_have_zero_cosine() {
        assert_eq!(cosine(array![0.0, 0.0].view(), array![1.0, 2.0].view()), 0.0);
        assert_eq!(cosine(array![1.0, 2.0].view(), array![0.0, 0.0].view()), 0.0);
    }

    #[test]
    fn clusters_file_validation() {
        let x = column(&[0.0, 0.1, 10.0, 10.1]);
        let model = kmeans_fit(&x, 2, 3, &KMeansOptions::default()).unwrap();
        let ids = ids(4);
        let ranking = rank_members(&x, &model, &ids, DEFAULT_TOP).unwrap();
        let file = ClustersFile::new(&model, &ids, &ranking);
        file.validate().unwrap();
        assert_eq!(file.labels_for(&ids).unwrap(), model.labels);
        assert_eq!(file.ranking(), ranking);
        let json = serde_json::to_string(&file).unwrap();
        let back: ClustersFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, file);

        let mut broken = file.clone();
        broken.labels.insert("d00".into(), 2);
        assert!(broken.validate().is_err());
        assert!(file.labels_for(&ids[..3]).is_err());
    }
}
