//! Day slicing, fixed-grid resampling, and affine normalization.

use super::{
    slots_per_day, Corpus, DayPoint, DaySlice, DayWindow, FixedSeries, OffsetPolicy, Sample,
    SensorKind, TimeSeriesError, MS_PER_DAY,
};
use chrono::NaiveDate;
use std::collections::BTreeMap;

const EPOCH_DAYS_FROM_CE: i64 = 719_163;

fn epoch_day_to_date(epoch_day: i64) -> NaiveDate {
    NaiveDate::from_num_days_from_ce_opt((epoch_day + EPOCH_DAYS_FROM_CE) as i32)
        .expect("epoch day within calendar range")
}

pub(crate) fn date_to_epoch_day(date: NaiveDate) -> i64 {
    i64::from(chrono::Datelike::num_days_from_ce(&date)) - EPOCH_DAYS_FROM_CE
}

/// Assign every sample to exactly one local day using the per-user fixed
/// UTC offset, returning slices ordered by (user, date) with in-day points
/// time-ordered.
pub fn slice_days(
    samples: &[Sample],
    policy: &OffsetPolicy,
) -> Result<Vec<DaySlice>, TimeSeriesError> {
    if samples.is_empty() {
        return Err(TimeSeriesError::EmptyInput);
    }
    let mut buckets: BTreeMap<(String, NaiveDate), (i32, Vec<DayPoint>)> = BTreeMap::new();
    for sample in samples {
        let offset = policy.offset_minutes(&sample.user_id);
        let local_ms = sample.timestamp_ms + i64::from(offset) * 60_000;
        let date = epoch_day_to_date(local_ms.div_euclid(MS_PER_DAY));
        let point = DayPoint {
            ms_of_day: local_ms.rem_euclid(MS_PER_DAY),
            kind: sample.kind,
            value: sample.value,
        };
        buckets
            .entry((sample.user_id.clone(), date))
            .or_insert_with(|| (offset, Vec::new()))
            .1
            .push(point);
    }
    Ok(buckets
        .into_iter()
        .map(|((user_id, local_date), (utc_offset_minutes, mut points))| {
            points.sort_by_key(|p| p.ms_of_day);
            DaySlice {
                user_id,
                window: DayWindow {
                    local_date,
                    utc_offset_minutes,
                },
                points,
            }
        })
        .collect())
}

/// Resample one user-day onto the fixed slot grid.
///
/// Slot value is the mean of samples falling in the slot. Empty interior
/// slots are linearly interpolated between the nearest filled neighbors;
/// empty leading/trailing slots take the nearest filled value. Coverage is
/// the filled fraction before imputation.
pub fn resample(slice: &DaySlice, slot_minutes: u32) -> Result<FixedSeries, TimeSeriesError> {
    let len = slots_per_day(slot_minutes)?;
    let first = slice.points.first().ok_or(TimeSeriesError::EmptyDay)?;
    if slice.points.iter().any(|p| p.kind != first.kind) {
        return Err(TimeSeriesError::MixedKinds);
    }
    let slot_ms = i64::from(slot_minutes) * 60_000;
    let mut sums = vec![0.0f64; len];
    let mut counts = vec![0usize; len];
    for point in &slice.points {
        let idx = (point.ms_of_day / slot_ms) as usize;
        sums[idx] += point.value;
        counts[idx] += 1;
    }
    let filled: Vec<usize> = (0..len).filter(|&i| counts[i] > 0).collect();
    if filled.is_empty() {
        return Err(TimeSeriesError::EmptyDay);
    }
    let mut values = vec![f64::NAN; len];
    for &i in &filled {
        values[i] = sums[i] / counts[i] as f64;
    }
    impute_gaps(&mut values, &filled);
    let coverage = filled.len() as f64 / len as f64;
    FixedSeries::new(
        slice.user_id.clone(),
        slice.window.local_date,
        values,
        slot_minutes,
        coverage,
        false,
    )
}

fn impute_gaps(values: &mut [f64], filled: &[usize]) {
    let first = filled[0];
    let last = *filled.last().expect("non-empty");
    let lead = values[first];
    for v in values.iter_mut().take(first) {
        *v = lead;
    }
    let tail = values[last];
    for v in values.iter_mut().skip(last + 1) {
        *v = tail;
    }
    for pair in filled.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b > a + 1 {
            let (va, vb) = (values[a], values[b]);
            for t in (a + 1)..b {
                let frac = (t - a) as f64 / (b - a) as f64;
                values[t] = va + (vb - va) * frac;
            }
        }
    }
}

/// Map values through `clamp((v - lo) / (hi - lo), 0, 1)` and mark the
/// series normalized.
pub fn normalize(
    series: &FixedSeries,
    lo: f64,
    hi: f64,
) -> Result<FixedSeries, TimeSeriesError> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(TimeSeriesError::InvalidRange { lo, hi });
    }
    if series.normalized {
        return Err(TimeSeriesError::AlreadyNormalized);
    }
    let span = hi - lo;
    let slots = series
        .slots
        .iter()
        .map(|v| ((v - lo) / span).clamp(0.0, 1.0))
        .collect();
    FixedSeries::new(
        series.user_id.clone(),
        series.local_date,
        slots,
        series.slot_minutes,
        series.coverage,
        true,
    )
}

/// Inverse affine map of [`normalize`] for values that were in range.
pub fn denormalize(
    series: &FixedSeries,
    lo: f64,
    hi: f64,
) -> Result<FixedSeries, TimeSeriesError> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(TimeSeriesError::InvalidRange { lo, hi });
    }
    if !series.normalized {
        return Err(TimeSeriesError::InvalidSeries(
            "denormalize expects a normalized series".into(),
        ));
    }
    let span = hi - lo;
    let slots = series.slots.iter().map(|v| v * span + lo).collect();
    FixedSeries::new(
        series.user_id.clone(),
        series.local_date,
        slots,
        series.slot_minutes,
        series.coverage,
        false,
    )
}

/// Slots covering `[start_hour, end_hour)`; the hours must land on slot
/// boundaries.
pub fn window_slice(
    series: &FixedSeries,
    start_hour: u32,
    end_hour: u32,
) -> Result<super::WindowSlice, TimeSeriesError> {
    let misaligned = TimeSeriesError::MisalignedWindow {
        start_hour,
        end_hour,
        slot_minutes: series.slot_minutes,
    };
    if start_hour >= end_hour || end_hour > 24 {
        return Err(misaligned);
    }
    if (start_hour * 60) % series.slot_minutes != 0 || (end_hour * 60) % series.slot_minutes != 0 {
        return Err(misaligned);
    }
    let from = (start_hour * 60 / series.slot_minutes) as usize;
    let to = (end_hour * 60 / series.slot_minutes) as usize;
    Ok(super::WindowSlice {
        start_hour,
        end_hour,
        slot_minutes: series.slot_minutes,
        coverage: series.coverage,
        values: series.slots[from..to].to_vec(),
    })
}

/// Full ingestion path for one sensor: slice, resample, and keep days with
/// coverage at or above `min_coverage`.
pub fn build_daily_corpus(
    samples: &[Sample],
    kind: SensorKind,
    policy: &OffsetPolicy,
    slot_minutes: u32,
    min_coverage: f64,
) -> Result<Corpus, TimeSeriesError> {
    let mut series = Vec::new();
    for slice in slice_days(samples, policy)? {
        let slice = slice.of_kind(kind);
        if slice.points.is_empty() {
            continue;
        }
        let day = resample(&slice, slot_minutes)?;
        if day.coverage >= min_coverage {
            series.push(day);
        }
    }
    Corpus::new(kind, series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // 2021-01-01T00:00:00Z
    const JAN1_2021_MS: i64 = 1_609_459_200_000;

    fn hr(user: &str, ts: i64, value: f64) -> Sample {
        Sample {
            user_id: user.into(),
            timestamp_ms: ts,
            kind: SensorKind::HeartRate,
            value,
        }
    }

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn day_start_boundary_inclusive() {
        let samples = [hr("u1", JAN1_2021_MS, 70.0)];
        let slices = slice_days(&samples, &OffsetPolicy::default()).unwrap();
        assert_eq!(slices.len(), 1);
        assert_eq!(slices[0].window.local_date, date(2021, 1, 1));
        assert_eq!(slices[0].points[0].ms_of_day, 0);
    }

    #[test]
    fn day_end_boundary_inclusive() {
        let ts = JAN1_2021_MS + MS_PER_DAY - 1_000; // 23:59:59
        let slices = slice_days(&[hr("u1", ts, 70.0)], &OffsetPolicy::default()).unwrap();
        assert_eq!(slices[0].window.local_date, date(2021, 1, 1));
    }

    #[test]
    fn midnight_split_with_positive_offset() {
        // UTC+60min. Shifted clocks computed by hand:
        //   22:30Z -> 23:30 local Jan 1;  23:30Z -> 00:30 local Jan 2
        //   00:10Z Jan 2 -> 01:10 local Jan 2;  10:00Z -> 11:00 local Jan 1
        let h = 3_600_000i64;
        let samples = [
            hr("u1", JAN1_2021_MS + 22 * h + 30 * 60_000, 60.0),
            hr("u1", JAN1_2021_MS + 23 * h + 30 * 60_000, 61.0),
            hr("u1", JAN1_2021_MS + 24 * h + 10 * 60_000, 62.0),
            hr("u1", JAN1_2021_MS + 10 * h, 63.0),
        ];
        let policy = OffsetPolicy::new(60).unwrap();
        let slices = slice_days(&samples, &policy).unwrap();
        assert_eq!(slices.len(), 2);
        assert_eq!(slices[0].window.local_date, date(2021, 1, 1));
        let day1: Vec<f64> = slices[0].points.iter().map(|p| p.value).collect();
        assert_eq!(day1, vec![63.0, 60.0]);
        assert_eq!(slices[1].window.local_date, date(2021, 1, 2));
        let day2: Vec<f64> = slices[1].points.iter().map(|p| p.value).collect();
        assert_eq!(day2, vec![61.0, 62.0]);
        // 23:30Z + 60min = 00:30 local
        assert_eq!(slices[1].points[0].ms_of_day, 30 * 60_000);
    }

    #[test]
    fn slice_days_partitions_samples() {
        let samples: Vec<Sample> = (0..100)
            .map(|i| hr(if i % 3 == 0 { "a" } else { "b" }, JAN1_2021_MS + i * 7_000_000, f64::from(i as u32)))
            .collect();
        let slices = slice_days(&samples, &OffsetPolicy::new(-300).unwrap()).unwrap();
        let mut recovered: Vec<f64> = slices
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.value))
            .collect();
        recovered.sort_by(f64::total_cmp);
        let mut original: Vec<f64> = samples.iter().map(|s| s.value).collect();
        original.sort_by(f64::total_cmp);
        assert_eq!(recovered, original);
    }

    #[test]
    fn empty_input_is_error() {
        assert_eq!(
            slice_days(&[], &OffsetPolicy::default()).unwrap_err(),
            TimeSeriesError::EmptyInput
        );
    }

    fn slice_from_points(points: Vec<(i64, f64)>) -> DaySlice {
        DaySlice {
            user_id: "u1".into(),
            window: DayWindow {
                local_date: date(2021, 1, 1),
                utc_offset_minutes: 0,
            },
            points: points
                .into_iter()
                .map(|(ms, value)| DayPoint {
                    ms_of_day: ms,
                    kind: SensorKind::HeartRate,
                    value,
                })
                .collect(),
        }
    }

    #[test]
    fn resample_identity_grid() {
        let slot_ms = 30 * 60_000i64;
        let points: Vec<(i64, f64)> = (0..48).map(|i| (i64::from(i) * slot_ms, 50.0 + f64::from(i))).collect();
        let series = resample(&slice_from_points(points), 30).unwrap();
        assert_eq!(series.slot_len(), 48);
        assert_eq!(series.coverage, 1.0);
        for (i, v) in series.slots.iter().enumerate() {
            assert_abs_diff_eq!(*v, 50.0 + i as f64);
        }
    }

    #[test]
    fn resample_interpolates_interior_gap() {
        let slot_ms = 30 * 60_000i64;
        let series = resample(&slice_from_points(vec![(0, 60.0), (2 * slot_ms, 80.0)]), 30).unwrap();
        assert_abs_diff_eq!(series.slots[0], 60.0);
        assert_abs_diff_eq!(series.slots[1], 70.0);
        assert_abs_diff_eq!(series.slots[2], 80.0);
        // trailing slots extend the last value
        assert_abs_diff_eq!(series.slots[47], 80.0);
        assert_abs_diff_eq!(series.coverage, 2.0 / 48.0);
    }

    #[test]
    fn resample_averages_within_slot() {
        let series = resample(&slice_from_points(vec![(0, 60.0), (60_000, 70.0)]), 30).unwrap();
        assert_abs_diff_eq!(series.slots[0], 65.0);
    }

    #[test]
    fn resample_empty_day_is_error() {
        assert_eq!(
            resample(&slice_from_points(vec![]), 30).unwrap_err(),
            TimeSeriesError::EmptyDay
        );
    }

    #[test]
    fn resample_rejects_bad_cadence() {
        assert_eq!(
            resample(&slice_from_points(vec![(0, 60.0)]), 7).unwrap_err(),
            TimeSeriesError::InvalidSlotMinutes(7)
        );
    }

    #[test]
    fn resample_idempotent_on_own_grid() {
        let slot_ms = 30 * 60_000i64;
        let series = resample(
            &slice_from_points(vec![(0, 55.0), (5 * slot_ms, 80.0), (40 * slot_ms, 66.0)]),
            30,
        )
        .unwrap();
        let again = resample(
            &slice_from_points(
                series
                    .slots
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (i as i64 * slot_ms, *v))
                    .collect(),
            ),
            30,
        )
        .unwrap();
        for (a, b) in series.slots.iter().zip(&again.slots) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    fn plain_series(slots: Vec<f64>) -> FixedSeries {
        FixedSeries::new("u1".into(), date(2021, 6, 15), slots, 30, 1.0, false).unwrap()
    }

    #[test]
    fn normalize_paper_bounds() {
        let series = plain_series(
            std::iter::repeat(31.0)
                .take(46)
                .chain([245.0, 138.0])
                .collect(),
        );
        let norm = normalize(&series, 31.0, 245.0).unwrap();
        assert!(norm.normalized);
        assert_abs_diff_eq!(norm.slots[0], 0.0);
        assert_abs_diff_eq!(norm.slots[46], 1.0);
        assert_abs_diff_eq!(norm.slots[47], 0.5);
    }

    #[test]
    fn normalize_clamps_out_of_range() {
        let series = plain_series(std::iter::repeat(250.0).take(47).chain([20.0]).collect());
        let norm = normalize(&series, 31.0, 245.0).unwrap();
        assert_eq!(norm.slots[0], 1.0);
        assert_eq!(norm.slots[47], 0.0);
    }

    #[test]
    fn normalize_invalid_range_and_double_normalize() {
        let series = plain_series(vec![70.0; 48]);
        assert_eq!(
            normalize(&series, 100.0, 100.0).unwrap_err(),
            TimeSeriesError::InvalidRange { lo: 100.0, hi: 100.0 }
        );
        let once = normalize(&series, 31.0, 245.0).unwrap();
        assert_eq!(
            normalize(&once, 31.0, 245.0).unwrap_err(),
            TimeSeriesError::AlreadyNormalized
        );
    }

    #[test]
    fn normalize_denormalize_round_trip() {
        let values: Vec<f64> = (0..48).map(|i| 40.0 + 3.0 * f64::from(i)).collect();
        let series = plain_series(values.clone());
        let restored = denormalize(&normalize(&series, 31.0, 245.0).unwrap(), 31.0, 245.0).unwrap();
        for (orig, back) in values.iter().zip(&restored.slots) {
            assert_abs_diff_eq!(*orig, *back, epsilon = 1e-12);
        }
    }

    #[test]
    fn window_slice_cases() {
        let series = plain_series((0..48).map(f64::from).collect());
        let sleep = window_slice(&series, 0, 8).unwrap();
        assert_eq!(sleep.values.len(), 16);
        assert_eq!(sleep.values[15], 15.0);
        let day = window_slice(&series, 6, 24).unwrap();
        assert_eq!(day.values.len(), 36);
        assert_eq!(day.values[0], 12.0);
        let all = window_slice(&series, 0, 24).unwrap();
        assert_eq!(all.values, series.slots);
    }

    #[test]
    fn window_slice_misaligned() {
        // 45-minute slots: a 1-hour boundary is not on the grid.
        let series =
            FixedSeries::new("u1".into(), date(2021, 1, 1), vec![0.0; 32], 45, 1.0, false).unwrap();
        assert!(matches!(
            window_slice(&series, 1, 8),
            Err(TimeSeriesError::MisalignedWindow { .. })
        ));
        assert!(matches!(
            window_slice(&series, 8, 8),
            Err(TimeSeriesError::MisalignedWindow { .. })
        ));
    }

    #[test]
    fn build_corpus_drops_low_coverage_days() {
        let slot_ms = 30 * 60_000i64;
        let mut samples = Vec::new();
        // day 1: full grid; day 2: single sample (coverage 1/48)
        for i in 0..48 {
            samples.push(hr("u1", JAN1_2021_MS + i64::from(i) * slot_ms + 1, 70.0));
        }
        samples.push(hr("u1", JAN1_2021_MS + MS_PER_DAY + 1, 70.0));
        let corpus = build_daily_corpus(
            &samples,
            SensorKind::HeartRate,
            &OffsetPolicy::default(),
            30,
            0.5,
        )
        .unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.series[0].local_date, date(2021, 1, 1));
    }
}
