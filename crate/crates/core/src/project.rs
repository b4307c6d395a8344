//! Two-dimensional views of the code space: PCA by power iteration, import of
//! externally computed coordinates, and CSV/SVG scatter output.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::io::Read;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterRanking;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionMethod {
    Pca,
    Imported,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection2D {
    pub ids: Vec<String>,
    /// `n × 2`.
    pub coords: Array2<f64>,
    pub method: ProjectionMethod,
}

/// Principal axes found by [`pca2_fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct PcaFit {
    pub mean: Array1<f64>,
    /// `2 × d`, unit rows.
    pub components: Array2<f64>,
    /// Variance along each component.
    pub variances: [f64; 2],
    /// Trace of the covariance matrix.
    pub total_variance: f64,
}

const MAX_ITER: usize = 1000;
const CONVERGED: f64 = 1e-12;

fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

fn orthogonalize(v: &mut Array1<f64>, against: &[Array1<f64>]) {
    for u in against {
        let p = v.dot(u);
        v.scaled_add(-p, u);
    }
}

/// Unit start vectors orthogonal to `against`: normalized all-ones first,
/// then each usable standard basis vector.
fn start_vectors(d: usize, against: &[Array1<f64>]) -> impl Iterator<Item = Array1<f64>> + '_ {
    let ones = Array1::from_elem(d, 1.0 / (d as f64).sqrt());
    std::iter::once(ones)
        .chain((0..d).map(move |j| {
            let mut e = Array1::zeros(d);
            e[j] = 1.0;
            e
        }))
        .filter_map(move |mut v| {
            orthogonalize(&mut v, against);
            let n = norm(&v);
            (n > 1e-8).then(|| v / n)
        })
}

/// Dominant eigenvector of the symmetric PSD matrix `c` restricted to the
/// complement of `against`. A start vector that `c` maps to (numerically)
/// zero is replaced by the next candidate.
fn power_iteration(c: &Array2<f64>, against: &[Array1<f64>], scale: f64) -> Array1<f64> {
    let negligible = scale * 1e-13;
    let mut fallback = None;
    for mut v in start_vectors(c.nrows(), against) {
        let mut w = c.dot(&v);
        orthogonalize(&mut w, against);
        if norm(&w) <= negligible {
            fallback.get_or_insert(v);
            continue;
        }
        for _ in 0..MAX_ITER {
            let n = norm(&w);
            if n <= negligible {
                break;
            }
            w /= n;
            let change = norm(&(&w - &v));
            v = w;
            if change < CONVERGED {
                break;
            }
            w = c.dot(&v);
            orthogonalize(&mut w, against);
        }
        return v;
    }
    // The remaining spectrum is zero: any unit vector in the complement is
    // an eigenvector.
    fallback.expect("d >= 2 leaves a direction orthogonal to one vector")
}

fn fix_sign(v: &mut Array1<f64>) {
    let mut best = 0;
    for (j, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = j;
        }
    }
    if v[best] < 0.0 {
        v.mapv_inplace(|x| -x);
    }
}

/// Top two principal axes of `features` by power iteration with deflation.
/// Each component's largest-magnitude entry is made positive.
pub fn pca2_fit(features: &Array2<f64>) -> Result<PcaFit> {
    let (n, d) = features.dim();
    if n < 3 {
        return Err(Error::Invalid(format!("PCA needs at least 3 points, got {n}")));
    }
    if d < 2 {
        return Err(Error::Invalid(format!("PCA to 2-D needs at least 2 columns, got {d}")));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("projection input".into()));
    }
    let mean = features.mean_axis(Axis(0)).expect("n >= 3");
    let centered = features - &mean;
    let mut cov = centered.t().dot(&centered);
    cov /= (n - 1) as f64;
    let total_variance = cov.diag().sum();
    if total_variance <= 0.0 {
        return Err(Error::Degenerate("features have zero total variance".into()));
    }

    let mut first = power_iteration(&cov, &[], total_variance);
    fix_sign(&mut first);
    let var1 = first.dot(&cov.dot(&first));
    let mut deflated = cov.clone();
    for i in 0..d {
        for j in 0..d {
            deflated[[i, j]] -= var1 * first[i] * first[j];
        }
    }
    let mut second = power_iteration(&deflated, std::slice::from_ref(&first), total_variance);
    fix_sign(&mut second);
    let var2 = second.dot(&cov.dot(&second)).max(0.0);

    let mut components = Array2::zeros((2, d));
    components.row_mut(0).assign(&first);
    components.row_mut(1).assign(&second);
    Ok(PcaFit {
        mean,
        components,
        variances: [var1, var2],
        total_variance,
    })
}

pub fn pca2(features: &Array2<f64>, ids: &[String]) -> Result<Projection2D> {
    if ids.len() != features.nrows() {
        return Err(Error::Dimension {
            context: "projection ids".into(),
            expected: features.nrows(),
            found: ids.len(),
        });
    }
    let fit = pca2_fit(features)?;
    let centered = features - &fit.mean;
    Ok(Projection2D {
        ids: ids.to_vec(),
        coords: centered.dot(&fit.components.t()),
        method: ProjectionMethod::Pca,
    })
}

/// Reads `id,x,y` CSV (further columns are ignored, so `projection.csv` can
/// be fed back in) and aligns the rows to `dataset_ids`.
pub fn import_coords<R: Read>(reader: R, dataset_ids: &[String]) -> Result<Projection2D> {
    let mut csv = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let header = csv
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if header.len() < 3 || &header[0] != "id" || &header[1] != "x" || &header[2] != "y" {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "header must start with id,x,y, found {:?}",
                header.iter().collect::<Vec<_>>()
            ),
        });
    }
    let known: HashSet<&str> = dataset_ids.iter().map(String::as_str).collect();
    let mut rows: HashMap<String, (f64, f64)> = HashMap::new();
    for (i, record) in csv.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let id = record[0].to_string();
        let coord = |k: usize, name: &str| -> Result<f64> {
            let v: f64 = record[k].trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("{name} value {:?} is not a number", &record[k]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("{name} is not finite"),
                });
            }
            Ok(v)
        };
        let point = (coord(1, "x")?, coord(2, "y")?);
        if !known.contains(id.as_str()) {
            return Err(Error::UnknownId(id));
        }
        if rows.insert(id.clone(), point).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    let mut coords = Array2::zeros((dataset_ids.len(), 2));
    for (r, id) in dataset_ids.iter().enumerate() {
        let (x, y) = rows.get(id).ok_or_else(|| Error::MissingId(id.clone()))?;
        coords[[r, 0]] = *x;
        coords[[r, 1]] = *y;
    }
    Ok(Projection2D {
        ids: dataset_ids.to_vec(),
        coords,
        method: ProjectionMethod::Imported,
    })
}

/// Cluster fill colours; cluster `c` uses `PALETTE[c % 8]`.
pub const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
];

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 40.0;

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn axis_map(values: impl Iterator<Item = f64> + Clone, lo_px: f64, hi_px: f64) -> impl Fn(f64) -> f64 {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    move |v| {
        if hi > lo {
            lo_px + (v - lo) / (hi - lo) * (hi_px - lo_px)
        } else {
            (lo_px + hi_px) / 2.0
        }
    }
}

pub struct Scatter {
    pub svg: String,
    pub csv: String,
}

/// `projection.csv` (`id,x,y,cluster,rank`) and `scatter.svg`. Points in a
/// cluster's top list get a black ring. `cluster_names` annotates the legend
/// (missing names fall back to `cluster <i>`).
pub fn emit_scatter(
    p: &Projection2D,
    labels: &[usize],
    ranking: &ClusterRanking,
    cluster_names: &[String],
) -> Result<Scatter> {
    if labels.len() != p.ids.len() || p.coords.nrows() != p.ids.len() {
        return Err(Error::Dimension {
            context: "scatter labels".into(),
            expected: p.ids.len(),
            found: labels.len(),
        });
    }
    let ranks: Vec<Option<usize>> = p
        .ids
        .iter()
        .zip(labels)
        .map(|(id, &c)| ranking.rank_of(c, id))
        .collect();

    let mut csv = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Invalid(format!("writing projection csv: {e}"));
    csv.write_record(["id", "x", "y", "cluster", "rank"]).map_err(csv_err)?;
    for (i, id) in p.ids.iter().enumerate() {
        let rank = ranks[i].map(|r| r.to_string()).unwrap_or_default();
        csv.write_record([
            id.clone(),
            p.coords[[i, 0]].to_string(),
            p.coords[[i, 1]].to_string(),
            labels[i].to_string(),
            rank,
        ])
        .map_err(csv_err)?;
    }
    let csv =
        String::from_utf8(csv.into_inner().map_err(|e| Error::Invalid(e.to_string()))?).expect("csv output is utf-8");

    let (xs, ys) = (p.coords.column(0), p.coords.column(1));
    let sx = axis_map(xs.iter().copied(), MARGIN, WIDTH - MARGIN);
    let sy = axis_map(ys.iter().copied(), HEIGHT - MARGIN, MARGIN);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>");
    for i in 0..p.ids.len() {
        let (x, y) = (sx(p.coords[[i, 0]]), sy(p.coords[[i, 1]]));
        let fill = PALETTE[labels[i] % PALETTE.len()];
        let title = match ranks[i] {
            Some(r) => format!("{} (cluster {}, rank {r})", p.ids[i], labels[i]),
            None => format!("{} (cluster {})", p.ids[i], labels[i]),
        };
        let _ = write!(svg, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"{fill}\"");
        if ranks[i].is_some() {
            let _ = write!(svg, " stroke=\"#000000\" stroke-width=\"1.5\"");
        }
        let _ = writeln!(svg, "><title>{}</title></circle>", xml_escape(&title));
        if ranks[i].is_some() {
            let _ = writeln!(
                svg,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"7\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>"
            );
        }
    }
    let clusters = labels.iter().copied().max().map_or(0, |m| m + 1);
    for c in 0..clusters {
        let y = MARGIN / 2.0 + 16.0 * c as f64;
        let name = cluster_names.get(c).cloned().unwrap_or_else(|| format!("cluster {c}"));
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{y:.2}\" r=\"5\" fill=\"{}\"/><text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" font-family=\"sans-serif\">{}</text>",
            WIDTH - 150.0,
            PALETTE[c % PALETTE.len()],
            WIDTH - 140.0,
            y + 4.0,
            xml_escape(&name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(Scatter { svg, csv })
}
