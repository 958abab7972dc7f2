//! Agglomerative clustering with the Ward variance-minimizing criterion.

use super::{check_k, compact_labels, validate_matrix, Algorithm, ClusterError, ClusterModel};
use crate::distance::squared_euclidean_unchecked;
use std::collections::BTreeMap;

/// Fit bottom-up Ward clustering and cut the dendrogram at `k` clusters.
///
/// Merge distances follow the Lance-Williams recurrence on squared
/// Euclidean distances; recorded merge heights are non-decreasing.
pub fn ward_fit(x: &[Vec<f64>], k: usize) -> Result<ClusterModel, ClusterError> {
    let (n, _) = validate_matrix(x)?;
    check_k(k, n)?;

    // Squared-distance matrix between active clusters.
    let mut d2 = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = squared_euclidean_unchecked(&x[i], &x[j]);
            d2[i][j] = d;
            d2[j][i] = d;
        }
    }
    let mut active: Vec<bool> = vec![true; n];
    let mut sizes: Vec<f64> = vec![1.0; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut last_height = 0.0f64;

    for _ in 0..(n - k) {
        let mut best = f64::INFINITY;
        let (mut bi, mut bj) = (0, 0);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if active[j] && d2[i][j] < best {
                    best = d2[i][j];
                    bi = i;
                    bj = j;
                }
            }
        }
        let height = best.max(0.0).sqrt();
        debug_assert!(
            height >= last_height - 1e-9,
            "ward merge heights decreased: {last_height} -> {height}"
        );
        last_height = height;

        // Lance-Williams update for Ward: the merged cluster keeps slot bi.
        let (ni, nj) = (sizes[bi], sizes[bj]);
        for h in 0..n {
            if !active[h] || h == bi || h == bj {
                continue;
            }
            let nh = sizes[h];
            let total = ni + nj + nh;
            let updated =
                ((ni + nh) * d2[h][bi] + (nj + nh) * d2[h][bj] - nh * d2[bi][bj]) / total;
            d2[h][bi] = updated;
            d2[bi][h] = updated;
        }
        sizes[bi] += sizes[bj];
        active[bj] = false;
        let moved = std::mem::take(&mut members[bj]);
        members[bi].extend(moved);
    }

    let mut raw = vec![0i32; n];
    let mut next = 0i32;
    for (slot, active) in active.iter().enumerate() {
        if *active {
            for &point in &members[slot] {
                raw[point] = next;
            }
            next += 1;
        }
    }
    let (labels, _, n_clusters) = compact_labels(&raw, None);
    let mut params = BTreeMap::new();
    params.insert("k".into(), k.to_string());
    Ok(ClusterModel {
        algorithm: Algorithm::Ward,
        params,
        labels,
        prototypes: None,
        n_clusters,
        seed: 0,
    })
}
