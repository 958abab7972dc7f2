//! The seven clustering engines applied to corpora of fixed-length daily
//! series: k-means, k-shape, kernel k-means, DBSCAN, OPTICS, Ward
//! agglomerative, and a self-organizing map.

mod density;
mod kernel;
mod kmeans;
mod kshape;
mod som;
mod ward;

pub use density::{dbscan_fit, default_eps, optics_fit, ReachabilityEntry, DEFAULT_MIN_PTS};
pub use kernel::{kernel_kmeans_fit, DEFAULT_KERNEL_GAMMA};
pub use kmeans::{kmeans_fit, DEFAULT_KMEANS_MAX_ITER};
pub use kshape::{kshape_fit, DEFAULT_KSHAPE_MAX_ITER};
pub use som::{som_fit, som_grid_size, SomGrid, DEFAULT_SOM_ITERATIONS};
pub use ward::ward_fit;

use crate::distance::DistanceError;
use std::collections::BTreeMap;
use std::str::FromStr;
use thiserror::Error;

/// Label value marking density-method noise points.
pub const NOISE: i32 = -1;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("k = {k} outside valid range 1..={n}")]
    InvalidK { k: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("series {index} is constant and cannot be z-normalized")]
    ConstantSeries { index: usize },
    #[error("series lengths differ: series {index} has {len}, expected {expected}")]
    RaggedMatrix {
        index: usize,
        len: usize,
        expected: usize,
    },
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Algorithm {
    KMeans,
    KShape,
    KernelKMeans,
    Dbscan,
    Optics,
    Ward,
    Som,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::KMeans => "kmeans",
            Algorithm::KShape => "kshape",
            Algorithm::KernelKMeans => "kernel-kmeans",
            Algorithm::Dbscan => "dbscan",
            Algorithm::Optics => "optics",
            Algorithm::Ward => "ward",
            Algorithm::Som => "som",
        }
    }

    pub fn all() -> [Algorithm; 7] {
        [
            Algorithm::KMeans,
            Algorithm::KShape,
            Algorithm::KernelKMeans,
            Algorithm::Dbscan,
            Algorithm::Optics,
            Algorithm::Ward,
            Algorithm::Som,
        ]
    }
}

impl FromStr for Algorithm {
    type Err = ClusterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::all()
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| ClusterError::InvalidParameter(format!("unknown algorithm {s:?}")))
    }
}

/// Fitted clustering artifact.
///
/// Non-noise labels are contiguous `0..n_clusters`, ordered by descending
/// cluster size. Prototypes are present for the centroid-bearing methods
/// (k-means, k-shape, SOM) and ordered to match the labels.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ClusterModel {
    pub algorithm: Algorithm,
    pub params: BTreeMap<String, String>,
    pub labels: Vec<i32>,
    pub prototypes: Option<Vec<Vec<f64>>>,
    pub n_clusters: usize,
    pub seed: u64,
}

impl ClusterModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Parameter lookup parsed to f64, for values recorded by the fits.
    pub fn param_f64(&self, key: &str) -> Option<f64> {
        self.params.get(key).and_then(|v| v.parse().ok())
    }
}

/// Per-cluster mean curve and membership count.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub count: usize,
    pub mean: Vec<f64>,
}

/// Elementwise mean curve of each cluster's members. Noise points are not
/// summarized; counts sum to n minus the noise count.
pub fn cluster_summary(model: &ClusterModel, x: &[Vec<f64>]) -> Result<Vec<ClusterSummary>, ClusterError> {
    if model.labels.len() != x.len() {
        return Err(ClusterError::InvalidParameter(format!(
            "model labels ({}) do not match corpus size ({})",
            model.labels.len(),
            x.len()
        )));
    }
    let dim = x.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0f64; dim]; model.n_clusters];
    let mut counts = vec![0usize; model.n_clusters];
    for (row, &label) in x.iter().zip(&model.labels) {
        if label == NOISE {
            continue;
        }
        let c = label as usize;
        counts[c] += 1;
        for (acc, v) in sums[c].iter_mut().zip(row) {
            *acc += v;
        }
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .enumerate()
        .map(|(cluster, (sum, count))| ClusterSummary {
            cluster,
            count,
            mean: sum
                .into_iter()
                .map(|s| if count > 0 { s / count as f64 } else { 0.0 })
                .collect(),
        })
        .collect())
}

/// Check a corpus matrix is non-empty and rectangular; returns (n, dim).
pub(crate) fn validate_matrix(x: &[Vec<f64>]) -> Result<(usize, usize), ClusterError> {
    let first = x.first().ok_or(ClusterError::EmptyCorpus)?;
    let dim = first.len();
    for (index, row) in x.iter().enumerate() {
        if row.len() != dim {
            return Err(ClusterError::RaggedMatrix {
                index,
                len: row.len(),
                expected: dim,
            });
        }
    }
    Ok((x.len(), dim))
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<(), ClusterError> {
    if k == 0 || k > n {
        return Err(ClusterError::InvalidK { k, n });
    }
    Ok(())
}

/// Renumber non-noise labels to `0..n_clusters` sorted by descending
/// cluster size (size ties ordered by smallest member index, which makes
/// the numbering a function of the partition alone), permuting any
/// prototypes to match. Labels may arrive with gaps (e.g. SOM units that
/// ended up empty).
pub(crate) fn compact_labels(
    raw_labels: &[i32],
    prototypes: Option<&[Vec<f64>]>,
) -> (Vec<i32>, Option<Vec<Vec<f64>>>, usize) {
    // per old label: (size, first member index)
    let mut stats: BTreeMap<i32, (usize, usize)> = BTreeMap::new();
    for (idx, &label) in raw_labels.iter().enumerate() {
        if label != NOISE {
            let entry = stats.entry(label).or_insert((0, idx));
            entry.0 += 1;
        }
    }
    let mut order: Vec<(i32, (usize, usize))> = stats.into_iter().collect();
    order.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.cmp(&b.1 .1)));
    let mapping: BTreeMap<i32, i32> = order
        .iter()
        .enumerate()
        .map(|(new, (old, _))| (*old, new as i32))
        .collect();
    let labels: Vec<i32> = raw_labels
        .iter()
        .map(|&l| if l == NOISE { NOISE } else { mapping[&l] })
        .collect();
    let prototypes = prototypes.map(|protos| {
        order
            .iter()
            .map(|(old, _)| protos[*old as usize].clone())
            .collect()
    });
    (labels, prototypes, order.len())
}
