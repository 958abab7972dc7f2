//! Density-based clustering: DBSCAN and OPTICS with eps-cut extraction.

use super::{compact_labels, validate_matrix, Algorithm, ClusterError, ClusterModel, NOISE};
use crate::distance::squared_euclidean_unchecked;
use std::collections::BTreeMap;

pub const DEFAULT_MIN_PTS: usize = 5;

/// Quantile of the min_pts-nearest-neighbor distances used when no eps is
/// given: the median of the k-dist curve. On normalized daily series the
/// upper quantiles over-reach, absorbing the shell points that belong in
/// noise.
pub const DEFAULT_EPS_QUANTILE: f64 = 0.5;

fn distance_matrix(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut d = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = squared_euclidean_unchecked(&x[i], &x[j]).sqrt();
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

/// Data-driven eps default: the [`DEFAULT_EPS_QUANTILE`] quantile of each
/// point's distance to its `min_pts`-th nearest neighbor.
pub fn default_eps(x: &[Vec<f64>], min_pts: usize) -> Result<f64, ClusterError> {
    let (n, _) = validate_matrix(x)?;
    if min_pts == 0 {
        return Err(ClusterError::InvalidParameter("min_pts must be >= 1".into()));
    }
    let k = min_pts.min(n - 1).max(1);
    let d = distance_matrix(x);
    let mut knn: Vec<f64> = (0..n)
        .map(|i| {
            let mut row = d[i].clone();
            row.sort_by(f64::total_cmp);
            row[k] // row[0] is the point itself
        })
        .collect();
    knn.sort_by(f64::total_cmp);
    let rank = ((DEFAULT_EPS_QUANTILE * n as f64).ceil() as usize).clamp(1, n) - 1;
    let eps = knn[rank];
    if eps <= 0.0 {
        // Degenerate corpus of duplicates; any positive eps works.
        return Ok(f64::MIN_POSITIVE);
    }
    Ok(eps)
}

/// Standard DBSCAN core/border/noise labeling. A point is core when at
/// least `min_pts` points (counting itself) lie within `eps`; border
/// points join the first cluster that reaches them in index order; noise
/// is labeled -1.
pub fn dbscan_fit(
    x: &[Vec<f64>],
    eps: f64,
    min_pts: usize,
) -> Result<ClusterModel, ClusterError> {
    let (n, _) = validate_matrix(x)?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(ClusterError::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if min_pts == 0 {
        return Err(ClusterError::InvalidParameter("min_pts must be >= 1".into()));
    }
    let d = distance_matrix(x);
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| d[i][j] <= eps).collect())
        .collect();
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_pts).collect();

    // Clusters are connected components of core points under the eps
    // graph; border points attach to the cluster of their lowest-index
    // core neighbor, making the labeling order-independent.
    let mut labels = vec![NOISE; n];
    let mut cluster = 0i32;
    for start in 0..n {
        if labels[start] != NOISE || !core[start] {
            continue;
        }
        labels[start] = cluster;
        let mut frontier = vec![start];
        while let Some(p) = frontier.pop() {
            for &q in &neighbors[p] {
                if core[q] && labels[q] == NOISE {
                    labels[q] = cluster;
                    frontier.push(q);
                }
            }
        }
        cluster += 1;
    }
    for p in 0..n {
        if labels[p] != NOISE || core[p] {
            continue;
        }
        if let Some(&q) = neighbors[p].iter().find(|&&q| core[q]) {
            labels[p] = labels[q];
        }
    }

    let (labels, _, n_clusters) = compact_labels(&labels, None);
    let mut params = BTreeMap::new();
    params.insert("eps".into(), eps.to_string());
    params.insert("min_pts".into(), min_pts.to_string());
    Ok(ClusterModel {
        algorithm: Algorithm::Dbscan,
        params,
        labels,
        prototypes: None,
        n_clusters,
        seed: 0,
    })
}

/// One position in the OPTICS ordering.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ReachabilityEntry {
    pub index: usize,
    /// None for points never reached from a processed core (infinite).
    pub reachability: Option<f64>,
    pub core_distance: Option<f64>,
}

/// OPTICS reachability ordering plus a horizontal eps-cut extraction that
/// reproduces DBSCAN semantics at that eps. When `extract_eps` is absent,
/// [`default_eps`] supplies it.
pub fn optics_fit(
    x: &[Vec<f64>],
    min_pts: usize,
    extract_eps: Option<f64>,
) -> Result<(ClusterModel, Vec<ReachabilityEntry>), ClusterError> {
    let (n, _) = validate_matrix(x)?;
    if min_pts == 0 {
        return Err(ClusterError::InvalidParameter("min_pts must be >= 1".into()));
    }
    let eps = match extract_eps {
        Some(v) if v > 0.0 && v.is_finite() => v,
        Some(v) => {
            return Err(ClusterError::InvalidParameter(format!(
                "extraction eps must be positive, got {v}"
            )))
        }
        None => default_eps(x, min_pts)?,
    };
    let d = distance_matrix(x);
    let core_distance: Vec<Option<f64>> = (0..n)
        .map(|i| {
            if min_pts > n {
                return None;
            }
            let mut row = d[i].clone();
            row.sort_by(f64::total_cmp);
            Some(row[min_pts - 1]) // the point itself counts
        })
        .collect();

    let mut processed = vec![false; n];
    // Best reachability proposed so far for unprocessed points.
    let mut reach = vec![f64::INFINITY; n];
    let mut in_seeds = vec![false; n];
    let mut ordering: Vec<ReachabilityEntry> = Vec::with_capacity(n);

    let update_seeds = |center: usize,
                        d: &[Vec<f64>],
                        processed: &[bool],
                        reach: &mut [f64],
                        in_seeds: &mut [bool],
                        core_distance: &[Option<f64>]| {
        let Some(core_d) = core_distance[center] else {
            return;
        };
        for q in 0..d.len() {
            if processed[q] || q == center {
                continue;
            }
            let candidate = core_d.max(d[center][q]);
            if candidate < reach[q] {
                reach[q] = candidate;
                in_seeds[q] = true;
            }
        }
    };

    for start in 0..n {
        if processed[start] {
            continue;
        }
        processed[start] = true;
        ordering.push(ReachabilityEntry {
            index: start,
            reachability: None,
            core_distance: core_distance[start],
        });
        update_seeds(start, &d, &processed, &mut reach, &mut in_seeds, &core_distance);
        loop {
            // Smallest proposed reachability among pending seeds, ties to
            // the lowest index, keeps the ordering deterministic.
            let mut next: Option<usize> = None;
            for q in 0..n {
                if in_seeds[q] && !processed[q] {
                    match next {
                        Some(best) if reach[q] >= reach[best] => {}
                        _ => next = Some(q),
                    }
                }
            }
            let Some(q) = next else { break };
            processed[q] = true;
            in_seeds[q] = false;
            ordering.push(ReachabilityEntry {
                index: q,
                reachability: Some(reach[q]),
                core_distance: core_distance[q],
            });
            update_seeds(q, &d, &processed, &mut reach, &mut in_seeds, &core_distance);
        }
    }

    // Horizontal cut. First pass walks the ordering over core points: a
    // reachability jump above eps opens a new cluster, otherwise the core
    // continues the current one. Second pass attaches border points (non-
    // core within eps of a core) the way DBSCAN does; the rest is noise.
    let is_core: Vec<bool> = (0..n)
        .map(|i| core_distance[i].is_some_and(|cd| cd <= eps))
        .collect();
    let mut raw = vec![NOISE; n];
    let mut cluster: i32 = -1;
    for entry in &ordering {
        if !is_core[entry.index] {
            continue;
        }
        let above = entry.reachability.is_none_or(|r| r > eps);
        if above {
            cluster += 1;
        }
        raw[entry.index] = cluster;
    }
    for p in 0..n {
        if raw[p] != NOISE {
            continue;
        }
        if let Some(core) = (0..n).find(|&q| is_core[q] && d[p][q] <= eps) {
            raw[p] = raw[core];
        }
    }

    let (labels, _, n_clusters) = compact_labels(&raw, None);
    let mut params = BTreeMap::new();
    params.insert("eps".into(), eps.to_string());
    params.insert("min_pts".into(), min_pts.to_string());
    Ok((
        ClusterModel {
            algorithm: Algorithm::Optics,
            params,
            labels,
            prototypes: None,
            n_clusters,
            seed: 0,
        },
        ordering,
    ))
}
