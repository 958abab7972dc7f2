//! Kernel k-means on the RBF Gram matrix.

use super::{check_k, compact_labels, validate_matrix, Algorithm, ClusterError, ClusterModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub const DEFAULT_KERNEL_GAMMA: f64 = 1.0;

#[derive(Debug, Clone, Copy)]
pub(crate) enum KernelKind {
    Rbf { gamma: f64 },
    /// Plain dot product; reduces kernel k-means to ordinary k-means and
    /// exists as a test hook.
    Linear,
}

impl KernelKind {
    fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            KernelKind::Rbf { gamma } => {
                (-gamma * crate::distance::squared_euclidean_unchecked(a, b)).exp()
            }
            KernelKind::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }
}

/// Fit kernel k-means with an RBF kernel. Lloyd updates run on the Gram
/// matrix; the feature-space objective never increases between iterations.
pub fn kernel_kmeans_fit(
    x: &[Vec<f64>],
    k: usize,
    gamma: f64,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterModel, ClusterError> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(ClusterError::InvalidParameter(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let mut params = BTreeMap::new();
    params.insert("gamma".into(), gamma.to_string());
    fit_with_kernel(x, k, KernelKind::Rbf { gamma }, seed, max_iter, params)
}

/// Independent seeded starts per fit; the best feature-space objective wins.
pub const KERNEL_KMEANS_RESTARTS: usize = 10;

pub(crate) fn fit_with_kernel(
    x: &[Vec<f64>],
    k: usize,
    kernel: KernelKind,
    seed: u64,
    max_iter: usize,
    mut params: BTreeMap<String, String>,
) -> Result<ClusterModel, ClusterError> {
    let (n, _) = validate_matrix(x)?;
    check_k(k, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut gram = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(&x[i], &x[j]);
            gram[i][j] = v;
            gram[j][i] = v;
        }
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..KERNEL_KMEANS_RESTARTS {
        let (labels, objective) = kernel_lloyd_run(&gram, k, max_iter, &mut rng);
        if best.as_ref().is_none_or(|(b, _)| objective < *b) {
            best = Some((objective, labels));
        }
    }
    let (_, labels) = best.expect("at least one restart");

    let raw: Vec<i32> = labels.iter().map(|&l| l as i32).collect();
    let (labels, _, n_clusters) = compact_labels(&raw, None);
    params.insert("k".into(), k.to_string());
    params.insert("max_iter".into(), max_iter.to_string());
    Ok(ClusterModel {
        algorithm: Algorithm::KernelKMeans,
        params,
        labels,
        prototypes: None,
        n_clusters,
        seed,
    })
}

fn kernel_lloyd_run(
    gram: &[Vec<f64>],
    k: usize,
    max_iter: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, f64) {
    let n = gram.len();
    let mut labels = plus_plus_init(gram, k, rng);
    let mut prev_objective = f64::INFINITY;
    for _ in 0..max_iter {
        let stats = ClusterStats::compute(gram, &labels, k);
        let next: Vec<usize> = (0..n).map(|i| stats.nearest_cluster(gram, i)).collect();
        let changed = next != labels;
        labels = next;
        repair_empty(gram, &mut labels, k);
        let stats = ClusterStats::compute(gram, &labels, k);
        let objective: f64 = (0..n).map(|i| stats.distance2(gram, i, labels[i])).sum();
        debug_assert!(
            objective <= prev_objective + 1e-9,
            "kernel k-means objective increased: {prev_objective} -> {objective}"
        );
        prev_objective = objective;
        if !changed {
            break;
        }
    }
    (labels, prev_objective)
}

/// Per-cluster kernel sums: distance in feature space to the implicit
/// centroid of cluster c is `K_ii - 2*s1[c][i]/|c| + s2[c]/|c|^2`.
struct ClusterStats {
    member_sums: Vec<Vec<f64>>,
    pair_sums: Vec<f64>,
    counts: Vec<usize>,
}

impl ClusterStats {
    fn compute(gram: &[Vec<f64>], labels: &[usize], k: usize) -> ClusterStats {
        let n = labels.len();
        let mut member_sums = vec![vec![0.0f64; n]; k];
        let mut pair_sums = vec![0.0f64; k];
        let mut counts = vec![0usize; k];
        for (j, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            for i in 0..n {
                member_sums[c][i] += gram[i][j];
            }
        }
        for (j, &c) in labels.iter().enumerate() {
            pair_sums[c] += member_sums[c][j];
        }
        ClusterStats {
            member_sums,
            pair_sums,
            counts,
        }
    }

    fn distance2(&self, gram: &[Vec<f64>], i: usize, c: usize) -> f64 {
        let count = self.counts[c] as f64;
        gram[i][i] - 2.0 * self.member_sums[c][i] / count
            + self.pair_sums[c] / (count * count)
    }

    fn nearest_cluster(&self, gram: &[Vec<f64>], i: usize) -> usize {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for c in 0..self.counts.len() {
            if self.counts[c] == 0 {
                continue;
            }
            let d = self.distance2(gram, i, c);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        best
    }
}

/// Greedy D^2 seeding in feature space, then nearest-seed assignment.
fn plus_plus_init(gram: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = gram.len();
    let point_d2 =
        |i: usize, c: usize| -> f64 { gram[i][i] - 2.0 * gram[i][c] + gram[c][c] };
    let mut seeds = vec![rng.random_range(0..n)];
    let mut best_d2: Vec<f64> = (0..n).map(|i| point_d2(i, seeds[0])).collect();
    while seeds.len() < k {
        let total: f64 = best_d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, d2) in best_d2.iter().enumerate() {
                target -= d2;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        seeds.push(next);
        for i in 0..n {
            best_d2[i] = best_d2[i].min(point_d2(i, next));
        }
    }
    (0..n)
        .map(|i| {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, &s) in seeds.iter().enumerate() {
                let d = point_d2(i, s);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn repair_empty(gram: &[Vec<f64>], labels: &mut [usize], k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let stats = ClusterStats::compute(gram, labels, k);
        let mut farthest = 0usize;
        let mut farthest_d = -1.0;
        for i in 0..labels.len() {
            if counts[labels[i]] <= 1 {
                continue;
            }
            let d = stats.distance2(gram, i, labels[i]);
            if d > farthest_d {
                farthest_d = d;
                farthest = i;
            }
        }
        labels[farthest] = empty;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::kmeans_fit;

    fn partition_sets(labels: &[i32]) -> std::collections::BTreeSet<Vec<usize>> {
        let mut groups: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (i, &l) in labels.iter().enumerate() {
            groups.entry(l).or_default().push(i);
        }
        groups.into_values().collect()
    }

    #[test]
    fn separates_concentric_rings() {
        // Inner ring radius 0.5, outer radius 2.5; a linear separator
        // cannot split them but the RBF feature space can.
        let mut x = Vec::new();
        for i in 0..24 {
            let t = f64::from(i) * std::f64::consts::TAU / 24.0;
            x.push(vec![0.5 * t.cos(), 0.5 * t.sin()]);
        }
        for i in 0..36 {
            let t = f64::from(i) * std::f64::consts::TAU / 36.0;
            x.push(vec![2.5 * t.cos(), 2.5 * t.sin()]);
        }
        let model = kernel_kmeans_fit(&x, 2, 0.25, 3, 300).unwrap();
        // ring membership must be pure
        let inner = model.labels[0];
        assert!(model.labels[..24].iter().all(|&l| l == inner));
        assert!(model.labels[24..].iter().all(|&l| l != inner));
    }

    #[test]
    fn linear_kernel_matches_kmeans_on_blobs() {
        let mut x = Vec::new();
        for i in 0..6 {
            x.push(vec![f64::from(i) * 0.05, 1.0]);
        }
        for i in 0..5 {
            x.push(vec![9.0 + f64::from(i) * 0.05, -2.0]);
        }
        let km = kmeans_fit(&x, 2, 5, 300).unwrap();
        let kk = fit_with_kernel(&x, 2, KernelKind::Linear, 5, 300, BTreeMap::new()).unwrap();
        assert_eq!(partition_sets(&km.labels), partition_sets(&kk.labels));
    }

    #[test]
    fn k_one_single_cluster() {
        let x = vec![vec![0.0], vec![1.0], vec![5.0]];
        let model = kernel_kmeans_fit(&x, 1, 0.7, 0, 300).unwrap();
        assert!(model.labels.iter().all(|&l| l == 0));
        assert!(model.prototypes.is_none());
    }

    #[test]
    fn invalid_gamma_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            kernel_kmeans_fit(&x, 2, -1.0, 0, 10),
            Err(ClusterError::InvalidParameter(_))
        ));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let x: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![f64::from(i % 4), f64::from(i / 4)])
            .collect();
        let a = kernel_kmeans_fit(&x, 3, 2.0, 123, 300).unwrap();
        let b = kernel_kmeans_fit(&x, 3, 2.0, 123, 300).unwrap();
        assert_eq!(a, b);
    }
}
