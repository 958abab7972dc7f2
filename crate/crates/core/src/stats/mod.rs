//! Significance testing, correlation measures, and temporal aggregation
//! profiles.

mod correlation;
mod ks;
mod temporal;

pub use correlation::{correlations, CorrelationSet};
pub use ks::{ks_test, ks_test_exact_permutation, KsResult};
pub use temporal::{temporal_aggregate, BucketKind, BucketStat, TemporalProfile};

use crate::timeseries::Corpus;
use std::collections::BTreeMap;
use thiserror::Error;

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {need} values, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("exact permutation test limited to n1+n2 <= {limit}, got {got}")]
    TooLargeForExact { limit: usize, got: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
}

/// Means of the two groups and their difference; only reported when the
/// gate passes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EffectSummary {
    pub mean_a: f64,
    pub mean_b: f64,
    pub mean_difference: f64,
}

/// A between-group comparison gated on KS significance. Insignificant
/// comparisons keep their test result but suppress the effect summary.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GatedComparison {
    pub ks: KsResult,
    pub alpha: f64,
    pub significant: bool,
    pub effect: Option<EffectSummary>,
}

/// Compare two groups, reporting the mean difference only when the KS
/// p-value is below `alpha`.
pub fn gated_comparison(
    group_a: &[f64],
    group_b: &[f64],
    alpha: f64,
) -> Result<GatedComparison, StatsError> {
    let ks = ks_test(group_a, group_b)?;
    let significant = ks.p_value < alpha;
    let effect = significant.then(|| {
        let mean_a = group_a.iter().sum::<f64>() / group_a.len() as f64;
        let mean_b = group_b.iter().sum::<f64>() / group_b.len() as f64;
        EffectSummary {
            mean_a,
            mean_b,
            mean_difference: mean_a - mean_b,
        }
    });
    Ok(GatedComparison {
        ks,
        alpha,
        significant,
        effect,
    })
}

/// Fractions of users whose average heart rate is slow (< 60 bpm), normal
/// (60-100 bpm), or fast (> 100 bpm). Expects raw bpm values.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HeartRateBands {
    pub slow: f64,
    pub normal: f64,
    pub fast: f64,
    pub n_users: usize,
}

pub fn heart_rate_band_summary(corpus: &Corpus) -> Result<HeartRateBands, StatsError> {
    if corpus.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let mut per_user: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for series in &corpus.series {
        let entry = per_user.entry(series.user_id.as_str()).or_insert((0.0, 0));
        entry.0 += series.slots.iter().sum::<f64>();
        entry.1 += series.slots.len();
    }
    let n_users = per_user.len();
    let (mut slow, mut normal, mut fast) = (0usize, 0usize, 0usize);
    for (sum, count) in per_user.values() {
        let mean = sum / *count as f64;
        if mean < 60.0 {
            slow += 1;
        } else if mean <= 100.0 {
            normal += 1;
        } else {
            fast += 1;
        }
    }
    Ok(HeartRateBands {
        slow: slow as f64 / n_users as f64,
        normal: normal as f64 / n_users as f64,
        fast: fast as f64 / n_users as f64,
        n_users,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{FixedSeries, SensorKind};
    use chrono::NaiveDate;

    #[test]
    fn identical_groups_not_significant() {
        let g = [1.0, 2.0, 3.0, 4.0];
        let cmp = gated_comparison(&g, &g, 0.05).unwrap();
        assert!(!cmp.significant);
        assert!(cmp.effect.is_none());
        assert_eq!(cmp.ks.d_statistic, 0.0);
    }

    #[test]
    fn disjoint_groups_significant() {
        let a: Vec<f64> = (0..20).map(f64::from).collect();
        let b: Vec<f64> = (100..120).map(f64::from).collect();
        let cmp = gated_comparison(&a, &b, 0.05).unwrap();
        assert!(cmp.significant);
        let effect = cmp.effect.unwrap();
        assert_eq!(effect.mean_difference, effect.mean_a - effect.mean_b);
        assert!(effect.mean_difference < 0.0);
    }

    #[test]
    fn zero_alpha_never_significant() {
        let a: Vec<f64> = (0..20).map(f64::from).collect();
        let b: Vec<f64> = (100..120).map(f64::from).collect();
        let cmp = gated_comparison(&a, &b, 0.0).unwrap();
        assert!(!cmp.significant);
        assert!(cmp.effect.is_none());
    }

    #[test]
    fn band_summary_splits_users() {
        let mk = |user: &str, bpm: f64| {
            FixedSeries::new(
                user.into(),
                NaiveDate::from_ymd_opt(2021, 1, 1).unwrap(),
                vec![bpm; 48],
                30,
                1.0,
                false,
            )
            .unwrap()
        };
        let corpus = Corpus::new(
            SensorKind::HeartRate,
            vec![mk("slow", 52.0), mk("n1", 72.0), mk("n2", 100.0), mk("fast", 130.0)],
        )
        .unwrap();
        let bands = heart_rate_band_summary(&corpus).unwrap();
        assert_eq!(bands.n_users, 4);
        assert_eq!(bands.slow, 0.25);
        assert_eq!(bands.normal, 0.5);
        assert_eq!(bands.fast, 0.25);
    }
}
