//! Lloyd k-means with k-means++ seeding.

use super::{check_k, compact_labels, validate_matrix, Algorithm, ClusterError, ClusterModel};
use crate::distance::squared_euclidean_unchecked;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub const DEFAULT_KMEANS_MAX_ITER: usize = 300;
/// Independent k-means++ starts per fit; the best objective wins.
pub const KMEANS_RESTARTS: usize = 10;

/// Fit k-means. Runs [`KMEANS_RESTARTS`] seeded k-means++ starts, each
/// iterating Lloyd assignment and mean updates to an assignment fixpoint
/// or `max_iter`, and keeps the lowest within-cluster sum of squares.
/// The objective never increases between iterations of a run.
pub fn kmeans_fit(
    x: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterModel, ClusterError> {
    let (n, _) = validate_matrix(x)?;
    check_k(k, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>, Vec<Vec<f64>>)> = None;
    for _ in 0..KMEANS_RESTARTS {
        let (labels, centroids, wcss) = lloyd_run(x, k, max_iter, &mut rng);
        if best.as_ref().is_none_or(|(b, _, _)| wcss < *b) {
            best = Some((wcss, labels, centroids));
        }
    }
    let (_, labels, centroids) = best.expect("at least one restart");

    let raw: Vec<i32> = labels.iter().map(|&l| l as i32).collect();
    let (labels, prototypes, n_clusters) = compact_labels(&raw, Some(&centroids));
    let mut params = BTreeMap::new();
    params.insert("k".into(), k.to_string());
    params.insert("max_iter".into(), max_iter.to_string());
    Ok(ClusterModel {
        algorithm: Algorithm::KMeans,
        params,
        labels,
        prototypes,
        n_clusters,
        seed,
    })
}

fn lloyd_run(
    x: &[Vec<f64>],
    k: usize,
    max_iter: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<Vec<f64>>, f64) {
    let n = x.len();
    let dim = x.first().map_or(0, Vec::len);
    let mut centroids = plus_plus_init(x, k, rng);
    let mut labels = vec![0usize; n];
    let mut prev_wcss = f64::INFINITY;
    for _ in 0..max_iter {
        let next = assign(x, &centroids);
        let changed = next != labels;
        labels = next;
        repair_empty_clusters(x, &centroids, &mut labels, k);
        centroids = means(x, &labels, k, dim);
        let objective = wcss(x, &labels, &centroids);
        debug_assert!(
            objective <= prev_wcss + 1e-9,
            "k-means objective increased: {prev_wcss} -> {objective}"
        );
        prev_wcss = objective;
        if !changed {
            break;
        }
    }
    (labels, centroids, prev_wcss)
}

/// k-means++: first center uniform, later centers drawn proportionally to
/// squared distance from the nearest chosen center.
fn plus_plus_init(x: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(x[rng.random_range(0..n)].clone());
    let mut best_d2: Vec<f64> = x
        .iter()
        .map(|row| squared_euclidean_unchecked(row, &centroids[0]))
        .collect();
    while centroids.len() < k {
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
            // All remaining mass at distance zero (duplicate points).
            rng.random_range(0..n)
        };
        centroids.push(x[next].clone());
        for (i, row) in x.iter().enumerate() {
            let d2 = squared_euclidean_unchecked(row, centroids.last().expect("just pushed"));
            if d2 < best_d2[i] {
                best_d2[i] = d2;
            }
        }
    }
    centroids
}

fn assign(x: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    x.iter()
        .map(|row| {
            let mut best = 0usize;
            let mut best_d2 = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d2 = squared_euclidean_unchecked(row, centroid);
                if d2 < best_d2 {
                    best_d2 = d2;
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Reseed each empty cluster with the point farthest from its assigned
/// centroid.
fn repair_empty_clusters(
    x: &[Vec<f64>],
    centroids: &[Vec<f64>],
    labels: &mut [usize],
    k: usize,
) {
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut farthest = 0usize;
        let mut farthest_d2 = -1.0;
        for (i, row) in x.iter().enumerate() {
            if counts[labels[i]] <= 1 {
                continue; // do not empty another cluster
            }
            let d2 = squared_euclidean_unchecked(row, &centroids[labels[i]]);
            if d2 > farthest_d2 {
                farthest_d2 = d2;
                farthest = i;
            }
        }
        labels[farthest] = empty;
    }
}

fn means(x: &[Vec<f64>], labels: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0f64; dim]; k];
    let mut counts = vec![0usize; k];
    for (row, &l) in x.iter().zip(labels) {
        counts[l] += 1;
        for (acc, v) in sums[l].iter_mut().zip(row) {
            *acc += v;
        }
    }
    sums.iter_mut().zip(&counts).for_each(|(sum, &count)| {
        if count > 0 {
            sum.iter_mut().for_each(|v| *v /= count as f64);
        }
    });
    sums
}

fn wcss(x: &[Vec<f64>], labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    x.iter()
        .zip(labels)
        .map(|(row, &l)| squared_euclidean_unchecked(row, &centroids[l]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one_d(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn separates_two_tight_pairs() {
        let x = one_d(&[0.0, 0.1, 10.0, 10.1]);
        let model = kmeans_fit(&x, 2, 7, DEFAULT_KMEANS_MAX_ITER).unwrap();
        assert_eq!(model.n_clusters, 2);
        assert_eq!(model.labels[0], model.labels[1]);
        assert_eq!(model.labels[2], model.labels[3]);
        assert_ne!(model.labels[0], model.labels[2]);
    }

    #[test]
    fn k_one_centroid_is_column_mean() {
        let x = vec![vec![1.0, 10.0], vec![3.0, 20.0], vec![5.0, 30.0]];
        let model = kmeans_fit(&x, 1, 0, DEFAULT_KMEANS_MAX_ITER).unwrap();
        let proto = &model.prototypes.as_ref().unwrap()[0];
        assert_abs_diff_eq!(proto[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(proto[1], 20.0, epsilon = 1e-12);
    }

    #[test]
    fn reaches_global_optimum_on_six_points() {
        // Oracle: exhaustively enumerate every 2-partition of the six
        // points and minimize the within-cluster sum of squares directly.
        let values = [0.0, 1.0, 2.0, 10.0, 11.0, 12.0];
        let x = one_d(&values);
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << 6) - 1 {
            let (mut sum_a, mut sum_b, mut n_a, mut n_b) = (0.0, 0.0, 0usize, 0usize);
            for (i, v) in values.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    sum_a += v;
                    n_a += 1;
                } else {
                    sum_b += v;
                    n_b += 1;
                }
            }
            let (mean_a, mean_b) = (sum_a / n_a as f64, sum_b / n_b as f64);
            let mut total = 0.0;
            for (i, v) in values.iter().enumerate() {
                let m = if mask & (1 << i) != 0 { mean_a } else { mean_b };
                total += (v - m) * (v - m);
            }
            best = best.min(total);
        }

        let model = kmeans_fit(&x, 2, 42, DEFAULT_KMEANS_MAX_ITER).unwrap();
        let protos = model.prototypes.as_ref().unwrap();
        let got: f64 = x
            .iter()
            .zip(&model.labels)
            .map(|(row, &l)| squared_euclidean_unchecked(row, &protos[l as usize]))
            .sum();
        assert_abs_diff_eq!(got, best, epsilon = 1e-9);
    }

    #[test]
    fn rejects_bad_k_and_empty_corpus() {
        let x = one_d(&[1.0, 2.0]);
        assert_eq!(
            kmeans_fit(&x, 3, 0, 10).unwrap_err(),
            ClusterError::InvalidK { k: 3, n: 2 }
        );
        assert_eq!(
            kmeans_fit(&x, 0, 0, 10).unwrap_err(),
            ClusterError::InvalidK { k: 0, n: 2 }
        );
        assert_eq!(
            kmeans_fit(&[], 1, 0, 10).unwrap_err(),
            ClusterError::EmptyCorpus
        );
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let x = one_d(&[5.0, 1.0, 9.0, 2.2, 8.1, 0.4, 7.7]);
        let a = kmeans_fit(&x, 3, 99, DEFAULT_KMEANS_MAX_ITER).unwrap();
        let b = kmeans_fit(&x, 3, 99, DEFAULT_KMEANS_MAX_ITER).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn labels_ordered_by_cluster_size() {
        let x = one_d(&[0.0, 0.1, 0.2, 10.0]);
        let model = kmeans_fit(&x, 2, 3, DEFAULT_KMEANS_MAX_ITER).unwrap();
        // the larger cluster takes label 0
        assert_eq!(model.labels, vec![0, 0, 0, 1]);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let x = one_d(&[1.0, 5.0, 9.0]);
        let model = kmeans_fit(&x, 3, 0, DEFAULT_KMEANS_MAX_ITER).unwrap();
        let mut sorted = model.labels.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2]);
    }
}
