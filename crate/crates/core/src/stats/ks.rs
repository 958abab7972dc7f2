//! Two-sample Kolmogorov-Smirnov test.

use super::StatsError;

pub const EXACT_PERMUTATION_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KsResult {
    pub d_statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Two-sample KS test: `D = sup |ECDF_a - ECDF_b|` computed exactly over
/// the merged breakpoints, with an asymptotic p-value from the Kolmogorov
/// distribution at effective size `n1*n2/(n1+n2)`.
pub fn ks_test(sample_a: &[f64], sample_b: &[f64]) -> Result<KsResult, StatsError> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let d = d_statistic(sample_a, sample_b);
    let n1 = sample_a.len();
    let n2 = sample_b.len();
    let effective = (n1 * n2) as f64 / (n1 + n2) as f64;
    Ok(KsResult {
        d_statistic: d,
        p_value: asymptotic_p(d, effective),
        n1,
        n2,
    })
}

fn d_statistic(sample_a: &[f64], sample_b: &[f64]) -> f64 {
    let mut a = sample_a.to_vec();
    let mut b = sample_b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        let diff = (i as f64 / n1 - j as f64 / n2).abs();
        if diff > d {
            d = diff;
        }
    }
    d
}

/// Survival function of the Kolmogorov distribution evaluated at the
/// finite-sample-corrected argument `(sqrt(en) + 0.12 + 0.11/sqrt(en)) D`.
fn asymptotic_p(d: f64, effective_n: f64) -> f64 {
    let root = effective_n.sqrt();
    let lambda = (root + 0.12 + 0.11 / root) * d;
    kolmogorov_survival(lambda)
}

fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0f64;
    let mut sign = 1.0f64;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-14 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Exact permutation p-value: the fraction of all group reassignments of
/// the pooled sample whose D statistic is at least the observed one.
/// Limited to `n1 + n2 <=` [`EXACT_PERMUTATION_LIMIT`].
pub fn ks_test_exact_permutation(
    sample_a: &[f64],
    sample_b: &[f64],
) -> Result<KsResult, StatsError> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let n1 = sample_a.len();
    let n2 = sample_b.len();
    let n = n1 + n2;
    if n > EXACT_PERMUTATION_LIMIT {
        return Err(StatsError::TooLargeForExact {
            limit: EXACT_PERMUTATION_LIMIT,
            got: n,
        });
    }
    let observed = d_statistic(sample_a, sample_b);
    let mut pooled: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    // boundary[i]: position i is the last occurrence of its value, the
    // only places where ECDF differences are observable
    let boundary: Vec<bool> = (0..n)
        .map(|i| i + 1 == n || pooled[i + 1] > pooled[i])
        .collect();

    let mut hits = 0u64;
    let mut total = 0u64;
    // Gosper's hack over all n1-subsets of the pooled positions.
    let mut mask: u64 = (1 << n1) - 1;
    let limit: u64 = 1 << n;
    while mask < limit {
        let mut in_a = 0usize;
        let mut seen = 0usize;
        let mut d = 0.0f64;
        for (pos, is_boundary) in boundary.iter().enumerate() {
            seen += 1;
            if mask & (1 << pos) != 0 {
                in_a += 1;
            }
            if *is_boundary {
                let diff =
                    (in_a as f64 / n1 as f64 - (seen - in_a) as f64 / n2 as f64).abs();
                if diff > d {
                    d = diff;
                }
            }
        }
        total += 1;
        if d >= observed - 1e-12 {
            hits += 1;
        }
        // next subset with the same popcount
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    Ok(KsResult {
        d_statistic: observed,
        p_value: hits as f64 / total as f64,
        n1,
        n2,
    })
}
