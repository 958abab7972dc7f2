//! Silhouette, distortion, and elbow detection.

use super::EvalError;
use crate::cluster::{Algorithm, ClusterModel, NOISE};
use crate::distance::{shape_based_distance, squared_euclidean_unchecked};
use std::collections::BTreeMap;

/// Mean silhouette over non-noise points: `(b - a) / max(a, b)` with the
/// mean intra-cluster distance `a` and the mean nearest-cluster distance
/// `b`. Points in singleton clusters score 0.
pub fn silhouette(x: &[Vec<f64>], labels: &[i32]) -> Result<f64, EvalError> {
    if x.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            left: x.len(),
            right: labels.len(),
        });
    }
    let kept: Vec<usize> = (0..x.len()).filter(|&i| labels[i] != NOISE).collect();
    let mut clusters: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for &i in &kept {
        clusters.entry(labels[i]).or_default().push(i);
    }
    if clusters.len() < 2 {
        return Err(EvalError::SingleCluster);
    }

    let mut total = 0.0;
    for &i in &kept {
        let own = &clusters[&labels[i]];
        if own.len() == 1 {
            continue; // singleton scores 0
        }
        let a = own
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| squared_euclidean_unchecked(&x[i], &x[j]).sqrt())
            .sum::<f64>()
            / (own.len() - 1) as f64;
        let mut b = f64::INFINITY;
        for (&label, members) in &clusters {
            if label == labels[i] {
                continue;
            }
            let mean = members
                .iter()
                .map(|&j| squared_euclidean_unchecked(&x[i], &x[j]).sqrt())
                .sum::<f64>()
                / members.len() as f64;
            b = b.min(mean);
        }
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / kept.len() as f64)
}

/// Sum of squared distances from each series to its assigned prototype.
/// Defined for the centroid-bearing methods; kernel k-means uses the
/// feature-space distance recovered from the stored gamma.
pub fn distortion(x: &[Vec<f64>], model: &ClusterModel) -> Result<f64, EvalError> {
    if x.len() != model.labels.len() {
        return Err(EvalError::LengthMismatch {
            left: x.len(),
            right: model.labels.len(),
        });
    }
    match model.algorithm {
        Algorithm::KMeans | Algorithm::Som => {
            let protos = model
                .prototypes
                .as_ref()
                .ok_or(EvalError::UnsupportedAlgorithm(model.algorithm))?;
            sum_over_points(x, &model.labels, |row, label| {
                Ok(squared_euclidean_unchecked(row, &protos[label]))
            })
        }
        Algorithm::KShape => {
            let protos = model
                .prototypes
                .as_ref()
                .ok_or(EvalError::UnsupportedAlgorithm(model.algorithm))?;
            sum_over_points(x, &model.labels, |row, label| {
                let d = shape_based_distance(row, &protos[label])?;
                Ok(d * d)
            })
        }
        Algorithm::KernelKMeans => kernel_distortion(x, model),
        Algorithm::Dbscan | Algorithm::Optics | Algorithm::Ward => {
            Err(EvalError::UnsupportedAlgorithm(model.algorithm))
        }
    }
}

fn sum_over_points(
    x: &[Vec<f64>],
    labels: &[i32],
    mut point_cost: impl FnMut(&[f64], usize) -> Result<f64, EvalError>,
) -> Result<f64, EvalError> {
    let mut total = 0.0;
    for (row, &label) in x.iter().zip(labels) {
        if label == NOISE {
            continue;
        }
        total += point_cost(row, label as usize)?;
    }
    Ok(total)
}

/// Feature-space distortion from the Gram matrix implied by the stored
/// gamma: `k(x,x) - 2 mean_j k(x, c_j) + mean_jl k(c_j, c_l)`.
fn kernel_distortion(x: &[Vec<f64>], model: &ClusterModel) -> Result<f64, EvalError> {
    let gamma = model
        .param_f64("gamma")
        .ok_or_else(|| EvalError::InvalidLabels("kernel model lacks gamma parameter".into()))?;
    let kernel =
        |a: &[f64], b: &[f64]| (-gamma * squared_euclidean_unchecked(a, b)).exp();
    let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in model.labels.iter().enumerate() {
        if l != NOISE {
            clusters.entry(l as usize).or_default().push(i);
        }
    }
    let mut pair_means: BTreeMap<usize, f64> = BTreeMap::new();
    for (&c, members) in &clusters {
        let mut sum = 0.0;
        for &j in members {
            for &l in members {
                sum += kernel(&x[j], &x[l]);
            }
        }
        pair_means.insert(c, sum / (members.len() * members.len()) as f64);
    }
    let mut total = 0.0;
    for (i, &label) in model.labels.iter().enumerate() {
        if label == NOISE {
            continue;
        }
        let members = &clusters[&(label as usize)];
        let mean_to_members: f64 = members
            .iter()
            .map(|&j| kernel(&x[i], &x[j]))
            .sum::<f64>()
            / members.len() as f64;
        total += 1.0 - 2.0 * mean_to_members + pair_means[&(label as usize)];
    }
    Ok(total)
}

/// Elbow read of a distortion curve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ElbowResult {
    pub k: usize,
    /// Set when the curve has no pronounced elbow (second differences tie).
    pub low_confidence: bool,
}

/// Pick the elbow as the argmax of the discrete second difference
/// `d[k-1] - 2 d[k] + d[k+1]`; ties resolve to the smallest k and set the
/// low-confidence flag. The curve must cover >= 3 consecutive k values.
pub fn elbow_detect(curve: &BTreeMap<usize, f64>) -> Result<ElbowResult, EvalError> {
    let ks: Vec<usize> = curve.keys().copied().collect();
    if ks.len() < 3 || ks.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(EvalError::InsufficientCurve);
    }
    let second_diffs: Vec<(usize, f64)> = ks
        .windows(3)
        .map(|w| (w[1], curve[&w[0]] - 2.0 * curve[&w[1]] + curve[&w[2]]))
        .collect();
    let best = second_diffs
        .iter()
        .map(|&(_, dd)| dd)
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * best.abs().max(1.0);
    let tied: Vec<usize> = second_diffs
        .iter()
        .filter(|&&(_, dd)| (dd - best).abs() <= tol)
        .map(|&(k, _)| k)
        .collect();
    Ok(ElbowResult {
        k: tied[0],
        low_confidence: tied.len() > 1,
    })
}
