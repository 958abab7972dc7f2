//! k-shape clustering: shape-based-distance assignment with
//! cross-correlation-aligned shape extraction for centroids.

use super::{check_k, compact_labels, validate_matrix, Algorithm, ClusterError, ClusterModel};
use crate::distance::z_normalize;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub const DEFAULT_KSHAPE_MAX_ITER: usize = 100;
/// Independent random starts per fit; the lowest total SBD wins.
pub const KSHAPE_RESTARTS: usize = 10;

/// Fit k-shape. Series are z-normalized up front (a constant series is a
/// preprocessing error naming the offender); assignment uses the
/// shape-based distance and centroids come from shape extraction over
/// members aligned to the previous centroid. The best of
/// [`KSHAPE_RESTARTS`] random starts is kept.
pub fn kshape_fit(
    x: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterModel, ClusterError> {
    let (n, len) = validate_matrix(x)?;
    check_k(k, n)?;
    if len < 2 {
        return Err(ClusterError::InvalidParameter(
            "k-shape needs series of length >= 2".into(),
        ));
    }
    let mut z = Vec::with_capacity(n);
    for (index, row) in x.iter().enumerate() {
        z.push(z_normalize(row).ok_or(ClusterError::ConstantSeries { index })?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>, Vec<Vec<f64>>)> = None;
    for _ in 0..KSHAPE_RESTARTS {
        let (labels, centroids) = kshape_run(&z, k, max_iter, &mut rng);
        let objective: f64 = z
            .iter()
            .zip(&labels)
            .map(|(series, &l)| sbd_z(series, &centroids[l]))
            .sum();
        if best.as_ref().is_none_or(|(b, _, _)| objective < *b) {
            best = Some((objective, labels, centroids));
        }
    }
    let (_, labels, centroids) = best.expect("at least one restart");

    let raw: Vec<i32> = labels.iter().map(|&l| l as i32).collect();
    let (labels, prototypes, n_clusters) = compact_labels(&raw, Some(&centroids));
    let mut params = BTreeMap::new();
    params.insert("k".into(), k.to_string());
    params.insert("max_iter".into(), max_iter.to_string());
    Ok(ClusterModel {
        algorithm: Algorithm::KShape,
        params,
        labels,
        prototypes,
        n_clusters,
        seed,
    })
}

fn kshape_run(
    z: &[Vec<f64>],
    k: usize,
    max_iter: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<Vec<f64>>) {
    let n = z.len();
    let len = z[0].len();
    // random initial assignment covering every cluster
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut labels = vec![0usize; n];
    for (pos, &idx) in order.iter().enumerate() {
        labels[idx] = pos % k;
    }

    let mut centroids: Vec<Vec<f64>> = vec![vec![0.0; len]; k];
    for _ in 0..max_iter {
        for c in 0..k {
            let members: Vec<&[f64]> = labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == c)
                .map(|(i, _)| z[i].as_slice())
                .collect();
            if !members.is_empty() {
                centroids[c] = extract_shape(&members, &centroids[c]);
            }
        }
        let next: Vec<usize> = z
            .iter()
            .map(|series| {
                let mut best = 0usize;
                let mut best_d = f64::INFINITY;
                for (c, centroid) in centroids.iter().enumerate() {
                    let d = sbd_z(series, centroid);
                    if d < best_d {
                        best_d = d;
                        best = c;
                    }
                }
                best
            })
            .collect();
        let changed = next != labels;
        labels = next;
        repair_empty(z, &centroids, &mut labels, k);
        if !changed {
            break;
        }
    }
    (labels, centroids)
}

/// SBD between pre-z-normalized series (`1 - max NCC` over circular
/// shifts). A zero reference (fresh centroid) is maximally distant.
fn sbd_z(a: &[f64], b: &[f64]) -> f64 {
    let (ncc, _) = best_shift(a, b);
    1.0 - ncc
}

/// Best normalized cross-correlation of `series` shifted against
/// `reference`, returning (ncc, shift).
fn best_shift(series: &[f64], reference: &[f64]) -> (f64, usize) {
    let len = series.len();
    let ns = series.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nr = reference.iter().map(|v| v * v).sum::<f64>().sqrt();
    if ns == 0.0 || nr == 0.0 {
        return (0.0, 0);
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_shift = 0usize;
    for shift in 0..len {
        let mut dot = 0.0;
        for (i, r) in reference.iter().enumerate() {
            dot += series[(i + shift) % len] * r;
        }
        let ncc = dot / (ns * nr);
        if ncc > best {
            best = ncc;
            best_shift = shift;
        }
    }
    (best, best_shift)
}

/// Shape extraction: align members to the reference, then take the
/// dominant eigenvector of the centered scatter matrix by power
/// iteration (the centered outer-product form never materializes the
/// L x L matrix). The result is z-normalized.
fn extract_shape(members: &[&[f64]], reference: &[f64]) -> Vec<f64> {
    let len = members[0].len();
    let aligned: Vec<Vec<f64>> = members
        .iter()
        .map(|m| {
            let (_, shift) = best_shift(m, reference);
            (0..len).map(|i| m[(i + shift) % len]).collect()
        })
        .collect();

    // Power iteration on M v = sum_j (a_j . v) a_j with column centering.
    let center = |v: &mut Vec<f64>| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= mean);
    };
    let mut v: Vec<f64> = if reference.iter().any(|&r| r != 0.0) {
        reference.to_vec()
    } else {
        aligned[0].clone()
    };
    center(&mut v);
    normalize_unit(&mut v);
    for _ in 0..200 {
        let mut next = vec![0.0f64; len];
        for a in &aligned {
            // (a - mean(a)) . v == a . v while v stays centered
            let dot: f64 = a.iter().zip(&v).map(|(x, y)| x * y).sum();
            let a_mean = a.iter().sum::<f64>() / len as f64;
            for (acc, &ai) in next.iter_mut().zip(a.iter()) {
                *acc += dot * (ai - a_mean);
            }
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-15 {
            v = aligned[0].clone();
            center(&mut v);
            normalize_unit(&mut v);
            break;
        }
        next.iter_mut().for_each(|x| *x /= norm);
        let agreement: f64 = next.iter().zip(&v).map(|(a, b)| a * b).sum();
        let converged = (1.0 - agreement.abs()) < 1e-12;
        v = next;
        if converged {
            break;
        }
    }
    // Orient toward the members, then z-normalize the shape.
    let lean: f64 = aligned
        .iter()
        .map(|a| a.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>())
        .sum();
    if lean < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    z_normalize(&v).unwrap_or(v)
}

fn normalize_unit(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn repair_empty(z: &[Vec<f64>], centroids: &[Vec<f64>], labels: &mut [usize], k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut farthest = 0usize;
        let mut farthest_d = -1.0;
        for (i, series) in z.iter().enumerate() {
            if counts[labels[i]] <= 1 {
                continue;
            }
            let d = sbd_z(series, &centroids[labels[i]]);
            if d > farthest_d {
                farthest_d = d;
                farthest = i;
            }
        }
        labels[farthest] = empty;
    }
}
