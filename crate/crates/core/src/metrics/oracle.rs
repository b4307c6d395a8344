//! Direct-from-definition validity indices.
//!
//! Nothing here is shared with the parent module: no distance matrix, no
//! partition helper. Everything is recomputed point by point so that the two
//! implementations can check each other. Intended for test-sized inputs.

use ndarray::Array2;

use super::MetricsReport;
use crate::error::{Error, Result};

pub const MAX_POINTS: usize = 500;

fn distance(x: &Array2<f64>, i: usize, j: usize) -> f64 {
    let mut total = 0.0;
    for c in 0..x.ncols() {
        let diff = x[[i, c]] - x[[j, c]];
        total += diff * diff;
    }
    total.sqrt()
}

fn distinct_labels(labels: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for &l in labels {
        if !out.contains(&l) {
            out.push(l);
        }
    }
    out.sort_unstable();
    out
}

fn members(labels: &[usize], cluster: usize) -> Vec<usize> {
    (0..labels.len()).filter(|&i| labels[i] == cluster).collect()
}

pub fn silhouette(x: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    let n = x.nrows();
    let clusters = distinct_labels(labels);
    if clusters.len() < 2 || clusters.len() > n - 1 {
        return Err(Error::Undefined {
            metric: "silhouette",
            reason: format!("k = {} with n = {n}", clusters.len()),
        });
    }
    let mut total = 0.0;
    for i in 0..n {
        let own = members(labels, labels[i]);
        if own.len() == 1 {
            continue;
        }
        let mut a = 0.0;
        for &j in &own {
            if j != i {
                a += distance(x, i, j);
            }
        }
        a /= (own.len() - 1) as f64;
        let mut b = f64::INFINITY;
        for &c in &clusters {
            if c == labels[i] {
                continue;
            }
            let other = members(labels, c);
            let mut mean = 0.0;
            for &j in &other {
                mean += distance(x, i, j);
            }
            mean /= other.len() as f64;
            if mean < b {
                b = mean;
            }
        }
        let larger = if a > b { a } else { b };
        if larger > 0.0 {
            total += (b - a) / larger;
        }
    }
    Ok(total / n as f64)
}

fn centroid(x: &Array2<f64>, idx: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; x.ncols()];
    for &i in idx {
        for (k, v) in c.iter_mut().enumerate() {
            *v += x[[i, k]];
        }
    }
    for v in &mut c {
        *v /= idx.len() as f64;
    }
    c
}

fn distance_to(x: &Array2<f64>, i: usize, point: &[f64]) -> f64 {
    let mut total = 0.0;
    for (c, p) in point.iter().enumerate() {
        total += (x[[i, c]] - p) * (x[[i, c]] - p);
    }
    total.sqrt()
}

pub fn davies_bouldin(x: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    let clusters = distinct_labels(labels);
    if clusters.len() < 2 {
        return Err(Error::Undefined {
            metric: "davies-bouldin",
            reason: "fewer than 2 clusters".into(),
        });
    }
    let groups: Vec<Vec<usize>> = clusters.iter().map(|&c| members(labels, c)).collect();
    let centres: Vec<Vec<f64>> = groups.iter().map(|g| centroid(x, g)).collect();
    let scatter: Vec<f64> = groups
        .iter()
        .zip(&centres)
        .map(|(g, c)| g.iter().map(|&i| distance_to(x, i, c)).sum::<f64>() / g.len() as f64)
        .collect();
    let mut total = 0.0;
    for i in 0..groups.len() {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..groups.len() {
            if i == j {
                continue;
            }
            let sep: f64 = centres[i]
                .iter()
                .zip(&centres[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if sep == 0.0 {
                return Err(Error::Degenerate("coincident centroids".into()));
            }
            let r = (scatter[i] + scatter[j]) / sep;
            if r > worst {
                worst = r;
            }
        }
        total += worst;
    }
    Ok(total / groups.len() as f64)
}

pub fn dunn(x: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    let clusters = distinct_labels(labels);
    if clusters.len() < 2 {
        return Err(Error::Undefined {
            metric: "dunn",
            reason: "fewer than 2 clusters".into(),
        });
    }
    let groups: Vec<Vec<usize>> = clusters.iter().map(|&c| members(labels, c)).collect();
    let mut closest = f64::INFINITY;
    for gi in 0..groups.len() {
        for gj in (gi + 1)..groups.len() {
            for &p in &groups[gi] {
                for &q in &groups[gj] {
                    closest = closest.min(distance(x, p, q));
                }
            }
        }
    }
    let mut widest = 0.0f64;
    for g in &groups {
        for &p in g {
            for &q in g {
                widest = widest.max(distance(x, p, q));
            }
        }
    }
    if widest == 0.0 {
        return if closest > 0.0 {
            Ok(f64::INFINITY)
        } else {
            Err(Error::Degenerate("all points identical".into()))
        };
    }
    Ok(closest / widest)
}

/// The three indices by brute force.
pub fn brute_force_oracles(x: &Array2<f64>, labels: &[usize]) -> Result<MetricsReport> {
    if x.nrows() > MAX_POINTS {
        return Err(Error::Invalid(format!("oracle limited to {MAX_POINTS} points")));
    }
    if labels.len() != x.nrows() {
        return Err(Error::Dimension {
            context: "labels".into(),
            expected: x.nrows(),
            found: labels.len(),
        });
    }
    Ok(MetricsReport {
        silhouette: silhouette(x, labels)?,
        davies_bouldin: davies_bouldin(x, labels)?,
        dunn: dunn(x, labels)?,
        k: distinct_labels(labels).len(),
        n: x.nrows(),
    })
}
