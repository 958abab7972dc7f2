//! Categorical heart-rate curve shapes and their per-cohort distributions.
//!
//! Sleep-window curves (12 a.m. to 8 a.m.) classify as Valley, Downward,
//! or Peak from the positions of their extrema and the least-squares
//! slope; daytime curves (6 a.m. to midnight) classify as Upward or
//! Downward from the slope alone. Curves are re-normalized to [0, 1]
//! before thresholds apply, so classification is invariant under positive
//! affine transforms of the input.

use crate::timeseries::WindowSlice;
use chrono::{Datelike, NaiveDate, Weekday};
use std::collections::BTreeMap;
use thiserror::Error;

pub const SLEEP_START_HOUR: u32 = 0;
pub const SLEEP_END_HOUR: u32 = 8;
pub const DAY_START_HOUR: u32 = 6;
pub const DAY_END_HOUR: u32 = 24;

#[derive(Debug, Error, PartialEq)]
pub enum PatternError {
    #[error("window coverage {coverage} below required {required}")]
    InsufficientCoverage { coverage: f64, required: f64 },
    #[error("expected a [{expected_start}, {expected_end}) window, got [{got_start}, {got_end})")]
    WrongWindow {
        expected_start: u32,
        expected_end: u32,
        got_start: u32,
        got_end: u32,
    },
    #[error("no labels to aggregate")]
    NoLabels,
    #[error("cohort {0:?} matched no users")]
    EmptyCohort(String),
}

/// Curve shape labels. The declaration order doubles as the documented
/// tie-break precedence (Valley first).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
pub enum PatternLabel {
    Valley,
    Downward,
    Peak,
    Upward,
    Unclassified,
}

impl PatternLabel {
    pub const ALL: [PatternLabel; 5] = [
        PatternLabel::Valley,
        PatternLabel::Downward,
        PatternLabel::Peak,
        PatternLabel::Upward,
        PatternLabel::Unclassified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PatternLabel::Valley => "valley",
            PatternLabel::Downward => "downward",
            PatternLabel::Peak => "peak",
            PatternLabel::Upward => "upward",
            PatternLabel::Unclassified => "unclassified",
        }
    }

    pub fn parse(text: &str) -> Option<PatternLabel> {
        PatternLabel::ALL.into_iter().find(|l| l.as_str() == text)
    }
}

/// Thresholds for the sleep-window classifier, applied to the smoothed
/// curve after re-normalization to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SleepClassifierConfig {
    /// Moving-average half-width in slots.
    pub smoothing_radius: usize,
    /// Normalized units; slopes are per hour.
    pub slope_tol: f64,
    /// Central band is [band, 1 - band] of the window extent.
    pub position_band: f64,
    pub min_coverage: f64,
}

impl Default for SleepClassifierConfig {
    fn default() -> Self {
        SleepClassifierConfig {
            smoothing_radius: 1,
            slope_tol: 0.02,
            position_band: 0.25,
            min_coverage: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayClassifierConfig {
    pub slope_tol: f64,
    pub min_coverage: f64,
}

impl Default for DayClassifierConfig {
    fn default() -> Self {
        DayClassifierConfig {
            slope_tol: 0.02,
            min_coverage: 0.5,
        }
    }
}

/// Classify a sleep-window fragment.
///
/// After smoothing and re-normalization: Valley when the global minimum
/// sits in the central band and both endpoints exceed it by at least
/// `slope_tol`; Downward when the least-squares slope is at most
/// `-slope_tol` per hour and the minimum falls in the final band; Peak
/// when the global maximum sits in the central band and exceeds both
/// endpoints by at least `slope_tol`; otherwise Unclassified.
pub fn classify_sleep_pattern(
    window: &WindowSlice,
    config: &SleepClassifierConfig,
) -> Result<PatternLabel, PatternError> {
    expect_window(window, SLEEP_START_HOUR, SLEEP_END_HOUR)?;
    check_coverage(window, config.min_coverage)?;
    let smoothed = moving_average(&window.values, config.smoothing_radius);
    let Some(curve) = rescale_unit(&smoothed) else {
        return Ok(PatternLabel::Unclassified);
    };
    let n = curve.len();
    let position = |idx: usize| idx as f64 / (n - 1) as f64;
    let min_idx = arg_extreme(&curve, |a, b| a < b);
    let max_idx = arg_extreme(&curve, |a, b| a > b);
    let band = config.position_band;
    let central = |p: f64| p >= band && p <= 1.0 - band;
    let first = curve[0];
    let last = curve[n - 1];
    let tol = config.slope_tol;

    if central(position(min_idx))
        && first - curve[min_idx] >= tol
        && last - curve[min_idx] >= tol
    {
        return Ok(PatternLabel::Valley);
    }
    let slope = slope_per_hour(&curve, window);
    if slope <= -tol && position(min_idx) >= 1.0 - band {
        return Ok(PatternLabel::Downward);
    }
    if central(position(max_idx))
        && curve[max_idx] - first >= tol
        && curve[max_idx] - last >= tol
    {
        return Ok(PatternLabel::Peak);
    }
    Ok(PatternLabel::Unclassified)
}

/// Classify a daytime fragment by least-squares slope: Upward at
/// `>= +slope_tol` per hour, Downward at `<= -slope_tol` per hour,
/// otherwise Unclassified.
pub fn classify_day_trend(
    window: &WindowSlice,
    config: &DayClassifierConfig,
) -> Result<PatternLabel, PatternError> {
    expect_window(window, DAY_START_HOUR, DAY_END_HOUR)?;
    check_coverage(window, config.min_coverage)?;
    let Some(curve) = rescale_unit(&window.values) else {
        return Ok(PatternLabel::Unclassified);
    };
    let slope = slope_per_hour(&curve, window);
    if slope >= config.slope_tol {
        Ok(PatternLabel::Upward)
    } else if slope <= -config.slope_tol {
        Ok(PatternLabel::Downward)
    } else {
        Ok(PatternLabel::Unclassified)
    }
}

fn expect_window(window: &WindowSlice, start: u32, end: u32) -> Result<(), PatternError> {
    if window.start_hour != start || window.end_hour != end {
        return Err(PatternError::WrongWindow {
            expected_start: start,
            expected_end: end,
            got_start: window.start_hour,
            got_end: window.end_hour,
        });
    }
    Ok(())
}

fn check_coverage(window: &WindowSlice, required: f64) -> Result<(), PatternError> {
    if window.coverage < required {
        return Err(PatternError::InsufficientCoverage {
            coverage: window.coverage,
            required,
        });
    }
    Ok(())
}

fn moving_average(values: &[f64], radius: usize) -> Vec<f64> {
    if radius == 0 {
        return values.to_vec();
    }
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(n - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Affine map onto [0, 1]; None for (near-)constant curves.
fn rescale_unit(values: &[f64]) -> Option<Vec<f64>> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if range < 1e-9 {
        return None;
    }
    Some(values.iter().map(|v| (v - min) / range).collect())
}

fn arg_extreme(values: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if better(v, values[best]) {
            best = i;
        }
    }
    best
}

/// Least-squares slope in curve units per hour.
fn slope_per_hour(curve: &[f64], window: &WindowSlice) -> f64 {
    let n = curve.len() as f64;
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = curve.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (i, &y) in curve.iter().enumerate() {
        let dx = i as f64 - mean_x;
        cov += dx * (y - mean_y);
        var += dx * dx;
    }
    let per_slot = if var > 0.0 { cov / var } else { 0.0 };
    per_slot * 60.0 / f64::from(window.slot_minutes)
}

/// Modal label; ties resolve by the declared precedence (Valley first).
pub fn user_majority_pattern(labels: &[PatternLabel]) -> Result<PatternLabel, PatternError> {
    if labels.is_empty() {
        return Err(PatternError::NoLabels);
    }
    let mut counts: BTreeMap<PatternLabel, usize> = BTreeMap::new();
    for &label in labels {
        *counts.entry(label).or_insert(0) += 1;
    }
    Ok(counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(label, _)| label)
        .expect("non-empty"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Season {
    Winter,
    Spring,
    Summer,
    Fall,
}

impl Season {
    pub fn of(date: NaiveDate) -> Season {
        match date.month() {
            12 | 1 | 2 => Season::Winter,
            3..=5 => Season::Spring,
            6..=8 => Season::Summer,
            _ => Season::Fall,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Season::Winter => "winter",
            Season::Spring => "spring",
            Season::Summer => "summer",
            Season::Fall => "fall",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum DayType {
    Weekday,
    /// Sunday, the unifying weekend across the covered regions.
    Weekend,
}

impl DayType {
    pub fn of(date: NaiveDate) -> DayType {
        if date.weekday() == Weekday::Sun {
            DayType::Weekend
        } else {
            DayType::Weekday
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DayType::Weekday => "weekday",
            DayType::Weekend => "weekend",
        }
    }
}

/// Which user-days feed a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cohort {
    All,
    Season(Season),
    DayType(DayType),
}

impl Cohort {
    pub fn descriptor(self) -> String {
        match self {
            Cohort::All => "all".into(),
            Cohort::Season(s) => s.as_str().into(),
            Cohort::DayType(d) => d.as_str().into(),
        }
    }

    pub fn matches(self, date: NaiveDate) -> bool {
        match self {
            Cohort::All => true,
            Cohort::Season(s) => Season::of(date) == s,
            Cohort::DayType(d) => DayType::of(date) == d,
        }
    }
}

/// One classified user-day.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DayLabel {
    pub user_id: String,
    pub local_date: NaiveDate,
    pub label: PatternLabel,
}

/// Normalized label histogram of a cohort of users.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PatternDistribution {
    pub cohort: String,
    pub fractions: BTreeMap<PatternLabel, f64>,
    pub n_users: usize,
}

impl PatternDistribution {
    pub fn fraction(&self, label: PatternLabel) -> f64 {
        self.fractions.get(&label).copied().unwrap_or(0.0)
    }
}

/// Histogram of per-user labels, normalized to fractions summing to one.
pub fn pattern_distribution(
    user_labels: &BTreeMap<String, PatternLabel>,
    cohort: &str,
) -> Result<PatternDistribution, PatternError> {
    if user_labels.is_empty() {
        return Err(PatternError::EmptyCohort(cohort.to_string()));
    }
    let n = user_labels.len() as f64;
    let mut fractions: BTreeMap<PatternLabel, f64> = BTreeMap::new();
    for &label in user_labels.values() {
        *fractions.entry(label).or_insert(0.0) += 1.0 / n;
    }
    Ok(PatternDistribution {
        cohort: cohort.to_string(),
        fractions,
        n_users: user_labels.len(),
    })
}

/// Filter labeled days to a cohort, take each user's majority pattern,
/// and normalize.
pub fn cohort_distribution(
    day_labels: &[DayLabel],
    cohort: Cohort,
) -> Result<PatternDistribution, PatternError> {
    let mut per_user: BTreeMap<String, Vec<PatternLabel>> = BTreeMap::new();
    for day in day_labels {
        if cohort.matches(day.local_date) {
            per_user
                .entry(day.user_id.clone())
                .or_default()
                .push(day.label);
        }
    }
    if per_user.is_empty() {
        return Err(PatternError::EmptyCohort(cohort.descriptor()));
    }
    let mut user_labels = BTreeMap::new();
    for (user, labels) in per_user {
        user_labels.insert(user, user_majority_pattern(&labels)?);
    }
    pattern_distribution(&user_labels, &cohort.descriptor())
}

/// Export distributions as CSV: `cohort,label,fraction,n`, all five
/// labels listed per cohort.
pub fn distributions_csv(distributions: &[PatternDistribution]) -> String {
    let mut out = String::from("cohort,label,fraction,n\n");
    for dist in distributions {
        for label in PatternLabel::ALL {
            out.push_str(&format!(
                "{},{},{},{}\n",
                dist.cohort,
                label.as_str(),
                dist.fraction(label),
                dist.n_users
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sleep_window(values: Vec<f64>) -> WindowSlice {
        WindowSlice {
            start_hour: 0,
            end_hour: 8,
            slot_minutes: 30,
            coverage: 1.0,
            values,
        }
    }

    fn day_window(values: Vec<f64>) -> WindowSlice {
        WindowSlice {
            start_hour: 6,
            end_hour: 24,
            slot_minutes: 30,
            coverage: 1.0,
            values,
        }
    }

    fn valley_curve() -> Vec<f64> {
        // cosine dip centered mid-window
        (0..16)
            .map(|i| {
                let t = f64::from(i) * 0.5;
                0.62 - 0.27 * (std::f64::consts::PI * t / 8.0).sin().powi(2)
            })
            .collect()
    }

    fn downward_curve() -> Vec<f64> {
        (0..16).map(|i| 0.68 - 0.02 * f64::from(i)).collect()
    }

    fn peak_curve() -> Vec<f64> {
        // lowest at sleep onset, bump near 03:00, settles above the start
        (0..16)
            .map(|i| {
                let t = f64::from(i) * 0.5;
                0.35 + 0.0125 * t + 0.3 * (-(t - 3.0) * (t - 3.0) / 4.5).exp()
            })
            .collect()
    }

    #[test]
    fn template_classification() {
        let cfg = SleepClassifierConfig::default();
        assert_eq!(
            classify_sleep_pattern(&sleep_window(valley_curve()), &cfg).unwrap(),
            PatternLabel::Valley
        );
        assert_eq!(
            classify_sleep_pattern(&sleep_window(downward_curve()), &cfg).unwrap(),
            PatternLabel::Downward
        );
        assert_eq!(
            classify_sleep_pattern(&sleep_window(peak_curve()), &cfg).unwrap(),
            PatternLabel::Peak
        );
        assert_eq!(
            classify_sleep_pattern(&sleep_window(vec![0.5; 16]), &cfg).unwrap(),
            PatternLabel::Unclassified
        );
    }

    #[test]
    fn smoothing_radius_agreement_on_templates() {
        for curve in [valley_curve(), downward_curve(), peak_curve()] {
            let mut labels = Vec::new();
            for radius in 0..=2 {
                let cfg = SleepClassifierConfig {
                    smoothing_radius: radius,
                    ..Default::default()
                };
                labels.push(classify_sleep_pattern(&sleep_window(curve.clone()), &cfg).unwrap());
            }
            assert!(labels.windows(2).all(|w| w[0] == w[1]), "{labels:?}");
        }
    }

    #[test]
    fn day_trend_classification() {
        let cfg = DayClassifierConfig::default();
        let up: Vec<f64> = (0..36).map(|i| 0.4 + 0.01 * f64::from(i)).collect();
        let down: Vec<f64> = (0..36).map(|i| 0.8 - 0.01 * f64::from(i)).collect();
        assert_eq!(
            classify_day_trend(&day_window(up), &cfg).unwrap(),
            PatternLabel::Upward
        );
        assert_eq!(
            classify_day_trend(&day_window(down), &cfg).unwrap(),
            PatternLabel::Downward
        );
        // a symmetric tent has an exactly zero least-squares slope
        let tent: Vec<f64> = (0..36)
            .map(|i| if i < 18 { f64::from(i) } else { f64::from(35 - i) })
            .collect();
        assert_eq!(
            classify_day_trend(&day_window(tent), &cfg).unwrap(),
            PatternLabel::Unclassified
        );
    }

    #[test]
    fn wrong_window_and_low_coverage_rejected() {
        let cfg = SleepClassifierConfig::default();
        let mut w = sleep_window(valley_curve());
        w.end_hour = 9;
        assert!(matches!(
            classify_sleep_pattern(&w, &cfg),
            Err(PatternError::WrongWindow { .. })
        ));
        let mut w = sleep_window(valley_curve());
        w.coverage = 0.25;
        assert!(matches!(
            classify_sleep_pattern(&w, &cfg),
            Err(PatternError::InsufficientCoverage { .. })
        ));
    }

    #[test]
    fn majority_and_tie_break() {
        use PatternLabel::*;
        assert_eq!(user_majority_pattern(&[Valley, Valley, Peak]).unwrap(), Valley);
        assert_eq!(user_majority_pattern(&[Peak]).unwrap(), Peak);
        assert_eq!(user_majority_pattern(&[Valley, Peak]).unwrap(), Valley);
        assert_eq!(user_majority_pattern(&[Upward, Peak]).unwrap(), Peak);
        assert_eq!(
            user_majority_pattern(&[]).unwrap_err(),
            PatternError::NoLabels
        );
    }

    #[test]
    fn distribution_basics() {
        use PatternLabel::*;
        let mut users = BTreeMap::new();
        users.insert("a".to_string(), Valley);
        users.insert("b".to_string(), Valley);
        users.insert("c".to_string(), Peak);
        users.insert("d".to_string(), Peak);
        let dist = pattern_distribution(&users, "all").unwrap();
        assert_eq!(dist.fraction(Valley), 0.5);
        assert_eq!(dist.fraction(Peak), 0.5);
        let total: f64 = dist.fractions.values().sum();
        assert!((total - 1.0).abs() < 1e-9);

        let mut single = BTreeMap::new();
        single.insert("x".to_string(), Downward);
        let dist = pattern_distribution(&single, "winter").unwrap();
        assert_eq!(dist.fraction(Downward), 1.0);

        assert!(matches!(
            pattern_distribution(&BTreeMap::new(), "all"),
            Err(PatternError::EmptyCohort(_))
        ));
    }

    #[test]
    fn cohort_filters() {
        use PatternLabel::*;
        let date = |y, m, d| NaiveDate::from_ymd_opt(y, m, d).unwrap();
        assert_eq!(Season::of(date(2021, 12, 5)), Season::Winter);
        assert_eq!(Season::of(date(2021, 3, 5)), Season::Spring);
        assert_eq!(Season::of(date(2021, 7, 5)), Season::Summer);
        assert_eq!(Season::of(date(2021, 10, 5)), Season::Fall);
        // 2021-01-03 was a Sunday
        assert_eq!(DayType::of(date(2021, 1, 3)), DayType::Weekend);
        assert_eq!(DayType::of(date(2021, 1, 4)), DayType::Weekday);

        let days = vec![
            DayLabel {
                user_id: "a".into(),
                local_date: date(2021, 1, 3),
                label: Valley,
            },
            DayLabel {
                user_id: "a".into(),
                local_date: date(2021, 1, 4),
                label: Peak,
            },
            DayLabel {
                user_id: "b".into(),
                local_date: date(2021, 1, 3),
                label: Peak,
            },
        ];
        let weekend = cohort_distribution(&days, Cohort::DayType(DayType::Weekend)).unwrap();
        assert_eq!(weekend.n_users, 2);
        assert_eq!(weekend.fraction(Valley), 0.5);
        let summer = cohort_distribution(&days, Cohort::Season(Season::Summer));
        assert!(matches!(summer, Err(PatternError::EmptyCohort(_))));
    }

    #[test]
    fn csv_lists_all_labels() {
        let mut users = BTreeMap::new();
        users.insert("a".to_string(), PatternLabel::Valley);
        let dist = pattern_distribution(&users, "all").unwrap();
        let csv = distributions_csv(&[dist]);
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.contains("all,valley,1,1"));
        assert!(csv.contains("all,peak,0,1"));
    }

    proptest! {
        // positive affine transforms never change the label
        #[test]
        fn affine_invariance(scale in 0.05f64..20.0, shift in -5.0f64..5.0, which in 0usize..3) {
            let curve = match which {
                0 => valley_curve(),
                1 => downward_curve(),
                _ => peak_curve(),
            };
            let cfg = SleepClassifierConfig::default();
            let base = classify_sleep_pattern(&sleep_window(curve.clone()), &cfg).unwrap();
            let transformed: Vec<f64> = curve.iter().map(|v| scale * v + shift).collect();
            let got = classify_sleep_pattern(&sleep_window(transformed), &cfg).unwrap();
            prop_assert_eq!(base, got);
        }

        // every window yields exactly one label, never a panic
        #[test]
        fn total_on_arbitrary_curves(values in prop::collection::vec(-10.0f64..10.0, 16)) {
            let cfg = SleepClassifierConfig::default();
            let label = classify_sleep_pattern(&sleep_window(values), &cfg).unwrap();
            prop_assert!(PatternLabel::ALL.contains(&label));
        }
    }
}
