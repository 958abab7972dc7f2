//! Extrinsic validation against ground truth: purity, Rand index, and
//! inter-annotator Cohen's kappa.

use super::EvalError;
use crate::cluster::NOISE;
use std::collections::BTreeMap;

/// Noise points (-1) take part as singleton clusters; every one gets a
/// fresh label before counting.
fn singletonize(labels: &[i32]) -> Vec<i64> {
    let mut next = -2i64;
    labels
        .iter()
        .map(|&l| {
            if l == NOISE {
                next -= 1;
                next
            } else {
                i64::from(l)
            }
        })
        .collect()
}

fn contingency(pred: &[i64], truth: &[i64]) -> BTreeMap<(i64, i64), u64> {
    let mut table = BTreeMap::new();
    for (&p, &t) in pred.iter().zip(truth) {
        *table.entry((p, t)).or_insert(0u64) += 1;
    }
    table
}

fn check_lengths(a: usize, b: usize) -> Result<(), EvalError> {
    if a != b {
        return Err(EvalError::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

/// Purity: the fraction of points whose cluster's dominant ground-truth
/// class matches their own, `(1/N) * sum_clusters max_class overlap`.
pub fn purity(labels: &[i32], truth: &[i32]) -> Result<f64, EvalError> {
    check_lengths(labels.len(), truth.len())?;
    if labels.is_empty() {
        return Err(EvalError::TooFew { need: 1, got: 0 });
    }
    let pred = singletonize(labels);
    let truth = singletonize(truth);
    let mut best_per_cluster: BTreeMap<i64, u64> = BTreeMap::new();
    for ((p, _), &count) in &contingency(&pred, &truth) {
        let best = best_per_cluster.entry(*p).or_insert(0);
        *best = (*best).max(count);
    }
    let hits: u64 = best_per_cluster.values().sum();
    Ok(hits as f64 / labels.len() as f64)
}

/// Rand index: the fraction of point pairs on which the clustering and
/// the ground truth agree (co-clustered in both or separated in both).
/// Computed from the contingency table in closed form; the pair counts
/// are exact integers.
pub fn rand_index(labels: &[i32], truth: &[i32]) -> Result<f64, EvalError> {
    check_lengths(labels.len(), truth.len())?;
    let n = labels.len() as u64;
    if n < 2 {
        return Err(EvalError::TooFew { need: 2, got: labels.len() });
    }
    let pred = singletonize(labels);
    let truth = singletonize(truth);
    let table = contingency(&pred, &truth);
    let mut pred_sizes: BTreeMap<i64, u64> = BTreeMap::new();
    let mut truth_sizes: BTreeMap<i64, u64> = BTreeMap::new();
    let mut joint_pairs = 0u64;
    for ((p, t), &count) in &table {
        *pred_sizes.entry(*p).or_insert(0) += count;
        *truth_sizes.entry(*t).or_insert(0) += count;
        joint_pairs += choose2(count);
    }
    let pred_pairs: u64 = pred_sizes.values().map(|&c| choose2(c)).sum();
    let truth_pairs: u64 = truth_sizes.values().map(|&c| choose2(c)).sum();
    let total = choose2(n);
    // disagreements: pairs together in exactly one of the two partitions
    let agreements = total - (pred_pairs + truth_pairs - 2 * joint_pairs);
    Ok(agreements as f64 / total as f64)
}

fn choose2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Chance-corrected agreement between two annotations over a shared label
/// alphabet: `(p_o - p_e) / (1 - p_e)` with marginal-product chance
/// agreement. Two constant, equal annotations define kappa as 1; constant
/// but different annotations are rejected as degenerate.
pub fn cohens_kappa<T: Ord>(ann1: &[T], ann2: &[T]) -> Result<f64, EvalError> {
    check_lengths(ann1.len(), ann2.len())?;
    let n = ann1.len();
    if n == 0 {
        return Err(EvalError::TooFew { need: 1, got: 0 });
    }
    let constant1 = ann1.iter().all(|v| v == &ann1[0]);
    let constant2 = ann2.iter().all(|v| v == &ann2[0]);
    if constant1 && constant2 {
        return if ann1[0] == ann2[0] {
            Ok(1.0)
        } else {
            Err(EvalError::DegenerateAnnotations)
        };
    }
    let observed = ann1
        .iter()
        .zip(ann2)
        .filter(|(a, b)| a == b)
        .count() as f64
        / n as f64;
    let mut marg1: BTreeMap<&T, usize> = BTreeMap::new();
    let mut marg2: BTreeMap<&T, usize> = BTreeMap::new();
    for (a, b) in ann1.iter().zip(ann2) {
        *marg1.entry(a).or_insert(0) += 1;
        *marg2.entry(b).or_insert(0) += 1;
    }
    let expected: f64 = marg1
        .iter()
        .map(|(label, &c1)| {
            let c2 = marg2.get(label).copied().unwrap_or(0);
            (c1 as f64 / n as f64) * (c2 as f64 / n as f64)
        })
        .sum();
    Ok((observed - expected) / (1.0 - expected))
}

/// Purity and Rand index of a clustering against ground truth, with the
/// all-singletons pathology flagged (purity is trivially 1 there).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExtrinsicScores {
    pub purity: f64,
    pub rand_index: f64,
    pub degenerate_singletons: bool,
}

pub fn extrinsic_scores(labels: &[i32], truth: &[i32]) -> Result<ExtrinsicScores, EvalError> {
    let purity = purity(labels, truth)?;
    let rand_index = rand_index(labels, truth)?;
    let distinct = singletonize(labels)
        .into_iter()
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    Ok(ExtrinsicScores {
        purity,
        rand_index,
        degenerate_singletons: distinct == labels.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn purity_perfect_and_half() {
        assert_abs_diff_eq!(purity(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 1.0);
        // max overlap 1 per cluster: (1 + 1) / 4
        assert_abs_diff_eq!(purity(&[0, 1, 0, 1], &[0, 0, 1, 1]).unwrap(), 0.5);
    }

    #[test]
    fn purity_all_singletons_is_degenerate_max() {
        let labels = [0, 1, 2, 3];
        let truth = [0, 0, 1, 1];
        assert_abs_diff_eq!(purity(&labels, &truth).unwrap(), 1.0);
        let scores = extrinsic_scores(&labels, &truth).unwrap();
        assert!(scores.degenerate_singletons);
    }

    #[test]
    fn rand_identical_partitions() {
        assert_abs_diff_eq!(rand_index(&[2, 2, 0, 1], &[5, 5, 7, 9]).unwrap(), 1.0);
    }

    #[test]
    fn rand_singletons_vs_together_is_zero() {
        assert_abs_diff_eq!(rand_index(&[0, 1, 2], &[0, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn rand_hand_enumeration() {
        // {{1,2},{3}} vs {{1},{2,3}}: of the 3 pairs only (1,3) agrees.
        assert_abs_diff_eq!(
            rand_index(&[0, 0, 1], &[0, 1, 1]).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rand_counts_noise_as_singletons() {
        // both noise points separate from everything, including each other
        let ri = rand_index(&[0, 0, -1, -1], &[0, 0, 1, 1]).unwrap();
        // pairs: (0,1) agree; (2,3) split in pred, together in truth ->
        // disagree; the four cross pairs agree. 5/6.
        assert_abs_diff_eq!(ri, 5.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn kappa_hand_cases() {
        assert_abs_diff_eq!(
            cohens_kappa(&["a", "b", "a"], &["a", "b", "a"]).unwrap(),
            1.0
        );
        // p_o = 0.5, p_e = 0.5
        assert_abs_diff_eq!(
            cohens_kappa(&["A", "A", "B", "B"], &["A", "B", "A", "B"]).unwrap(),
            0.0
        );
        // p_o = 0.75, p_e = 0.5
        assert_abs_diff_eq!(
            cohens_kappa(&["A", "A", "A", "B"], &["A", "A", "B", "B"]).unwrap(),
            0.5
        );
    }

    #[test]
    fn kappa_constant_edge_cases() {
        assert_abs_diff_eq!(cohens_kappa(&[1, 1, 1], &[1, 1, 1]).unwrap(), 1.0);
        assert_eq!(
            cohens_kappa(&[1, 1, 1], &[2, 2, 2]).unwrap_err(),
            EvalError::DegenerateAnnotations
        );
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(purity(&[0], &[0, 1]).is_err());
        assert!(rand_index(&[0], &[0, 1]).is_err());
        assert!(cohens_kappa(&[0], &[0, 1]).is_err());
    }

    /// Brute-force oracles: explicit pair double loop for the Rand index
    /// and explicit set intersections for purity.
    pub(crate) fn rand_oracle(labels: &[i32], truth: &[i32]) -> f64 {
        let pred = singletonize(labels);
        let t = singletonize(truth);
        let n = labels.len();
        let mut agree = 0u64;
        let mut total = 0u64;
        for i in 0..n {
            for j in (i + 1)..n {
                total += 1;
                if (pred[i] == pred[j]) == (t[i] == t[j]) {
                    agree += 1;
                }
            }
        }
        agree as f64 / total as f64
    }

    pub(crate) fn purity_oracle(labels: &[i32], truth: &[i32]) -> f64 {
        let pred = singletonize(labels);
        let t = singletonize(truth);
        let clusters: std::collections::BTreeSet<i64> = pred.iter().copied().collect();
        let classes: std::collections::BTreeSet<i64> = t.iter().copied().collect();
        let mut hits = 0usize;
        for c in &clusters {
            let mut best = 0usize;
            for class in &classes {
                let overlap = pred
                    .iter()
                    .zip(&t)
                    .filter(|(p, tt)| *p == c && *tt == class)
                    .count();
                best = best.max(overlap);
            }
            hits += best;
        }
        hits as f64 / labels.len() as f64
    }

    proptest! {
        #[test]
        fn rand_and_purity_match_brute_force(
            labels in prop::collection::vec(-1i32..4, 2..10),
            truth_seed in prop::collection::vec(0i32..4, 2..10),
        ) {
            let n = labels.len().min(truth_seed.len());
            let labels = &labels[..n];
            let truth = &truth_seed[..n];
            prop_assert_eq!(rand_index(labels, truth).unwrap(), rand_oracle(labels, truth));
            prop_assert_eq!(purity(labels, truth).unwrap(), purity_oracle(labels, truth));
        }

        #[test]
        fn rand_invariant_under_relabeling(
            labels in prop::collection::vec(0i32..4, 2..12),
            truth in prop::collection::vec(0i32..4, 2..12),
        ) {
            let n = labels.len().min(truth.len());
            let labels = &labels[..n];
            let truth = &truth[..n];
            // permute label names: l -> 3 - l
            let renamed: Vec<i32> = labels.iter().map(|&l| 3 - l).collect();
            prop_assert_eq!(
                rand_index(labels, truth).unwrap(),
                rand_index(&renamed, truth).unwrap()
            );
            prop_assert_eq!(
                purity(labels, truth).unwrap(),
                purity(&renamed, truth).unwrap()
            );
        }

        #[test]
        fn purity_nondecreasing_under_refinement(
            labels in prop::collection::vec(0i32..3, 4..12),
            truth in prop::collection::vec(0i32..3, 4..12),
            split_point in 0usize..12,
        ) {
            let n = labels.len().min(truth.len());
            let labels = &labels[..n];
            let truth = &truth[..n];
            // split cluster 0 into 0 and 9 at an arbitrary position
            let mut refined = labels.to_vec();
            let mut seen = 0usize;
            for l in refined.iter_mut() {
                if *l == 0 {
                    if seen >= split_point % n {
                        *l = 9;
                    }
                    seen += 1;
                }
            }
            let before = purity(labels, truth).unwrap();
            let after = purity(&refined, truth).unwrap();
            prop_assert!(after >= before - 1e-15);
        }
    }
}
