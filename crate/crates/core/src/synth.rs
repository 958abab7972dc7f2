//! Deterministic generator of labeled synthetic wearable corpora: the
//! ground-truth oracle behind the clustering, classification, and
//! statistics test suites.
//!
//! Heart-rate days are built from one full-day template per pattern label
//! (normalized units), plus i.i.d. Gaussian slot noise and a small
//! per-user vertical offset. Step-count days follow a diurnal tent
//! profile peaking at a configurable hour, scaled down on Sundays.

use crate::pattern::PatternLabel;
use crate::timeseries::{slots_per_day, Corpus, FixedSeries, SensorKind, TimeSeriesError};
use chrono::{Days, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("pattern mix fractions must be non-negative and sum to 1, got sum {0}")]
    InvalidMix(f64),
    #[error("cadence must be 10, 30, or 60 minutes, got {0}")]
    InvalidCadence(u32),
    #[error("activity peak hour {0} outside [0, 23]")]
    InvalidPeakHour(u32),
    #[error("weekend activity scale {0} outside (0, 1]")]
    InvalidScale(f64),
    #[error("noise sigma must be non-negative and finite, got {0}")]
    InvalidSigma(f64),
    #[error("corpus needs at least one user and one day")]
    EmptyPlan,
    #[error("labels file line {line}: {message}")]
    LabelsFormat { line: usize, message: String },
    #[error(transparent)]
    TimeSeries(#[from] TimeSeriesError),
}

/// Peak step count per 30 minutes at the top of the diurnal profile.
pub const STEPS_PEAK_PER_HALF_HOUR: f64 = 300.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub n_users: usize,
    pub days_per_user: usize,
    pub pattern_mix: BTreeMap<PatternLabel, f64>,
    /// Slot noise in normalized units; the per-user offset draws from
    /// half this sigma so zero noise means exact templates.
    pub noise_sigma: f64,
    pub cadence_minutes: u32,
    pub activity_peak_hour: u32,
    pub weekend_activity_scale: f64,
    pub seed: u64,
    pub start_date: NaiveDate,
}

impl CorpusSpec {
    /// Plan with the default pattern mix (valley 44%, downward 29.5%,
    /// peak 26.3%, unclassified 0.2%), 30-minute cadence, evening
    /// activity peak, and a Monday start date.
    pub fn new(n_users: usize, days_per_user: usize, noise_sigma: f64, seed: u64) -> CorpusSpec {
        let mut pattern_mix = BTreeMap::new();
        pattern_mix.insert(PatternLabel::Valley, 0.44);
        pattern_mix.insert(PatternLabel::Downward, 0.295);
        pattern_mix.insert(PatternLabel::Peak, 0.263);
        pattern_mix.insert(PatternLabel::Unclassified, 0.002);
        CorpusSpec {
            n_users,
            days_per_user,
            pattern_mix,
            noise_sigma,
            cadence_minutes: 30,
            activity_peak_hour: 18,
            weekend_activity_scale: 0.8,
            seed,
            start_date: NaiveDate::from_ymd_opt(2021, 1, 4).expect("valid date"),
        }
    }

    pub fn with_mix(mut self, mix: &[(PatternLabel, f64)]) -> CorpusSpec {
        self.pattern_mix = mix.iter().copied().collect();
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_users == 0 || self.days_per_user == 0 {
            return Err(SynthError::EmptyPlan);
        }
        let sum: f64 = self.pattern_mix.values().sum();
        if self.pattern_mix.values().any(|&f| !(0.0..=1.0).contains(&f))
            || (sum - 1.0).abs() > 1e-9
        {
            return Err(SynthError::InvalidMix(sum));
        }
        if ![10, 30, 60].contains(&self.cadence_minutes) {
            return Err(SynthError::InvalidCadence(self.cadence_minutes));
        }
        if self.activity_peak_hour > 23 {
            return Err(SynthError::InvalidPeakHour(self.activity_peak_hour));
        }
        if !(self.weekend_activity_scale > 0.0 && self.weekend_activity_scale <= 1.0) {
            return Err(SynthError::InvalidScale(self.weekend_activity_scale));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(SynthError::InvalidSigma(self.noise_sigma));
        }
        Ok(())
    }
}

/// Normalized heart-rate template value for a pattern at hour `t` of the
/// day. Sleep shapes occupy [0, 8); the daytime arc rises to an evening
/// high at 18:00 and settles by midnight.
pub fn template_value(label: PatternLabel, t: f64) -> f64 {
    match label {
        PatternLabel::Valley => {
            if t < 8.0 {
                // dip bottoming out at 04:00
                0.62 - 0.27 * (std::f64::consts::PI * t / 8.0).sin().powi(2)
            } else {
                day_arc(t, 0.62)
            }
        }
        PatternLabel::Downward => {
            if t < 8.0 {
                0.68 - 0.33 * t / 8.0
            } else if t < 11.0 {
                lerp(t, 8.0, 11.0, 0.35, 0.65)
            } else if t < 18.0 {
                lerp(t, 11.0, 18.0, 0.65, 0.72)
            } else {
                lerp(t, 18.0, 24.0, 0.72, 0.55)
            }
        }
        PatternLabel::Peak => {
            if t < 8.0 {
                // lowest at sleep onset, bump centered 03:00, settling high
                0.35 + 0.0125 * t + 0.3 * (-(t - 3.0) * (t - 3.0) / 4.5).exp()
            } else {
                day_arc(t, 0.451)
            }
        }
        PatternLabel::Upward => {
            if t < 4.0 {
                lerp(t, 0.0, 4.0, 0.55, 0.45)
            } else if t < 8.0 {
                lerp(t, 4.0, 8.0, 0.45, 0.5)
            } else {
                lerp(t, 8.0, 24.0, 0.5, 0.75)
            }
        }
        PatternLabel::Unclassified => 0.5,
    }
}

fn day_arc(t: f64, at_eight: f64) -> f64 {
    if t < 18.0 {
        lerp(t, 8.0, 18.0, at_eight, 0.72)
    } else {
        lerp(t, 18.0, 24.0, 0.72, 0.55)
    }
}

fn lerp(t: f64, t0: f64, t1: f64, v0: f64, v1: f64) -> f64 {
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

/// Diurnal step profile in [0, 1]: a tent peaking inside
/// `[peak_hour, peak_hour + 1)` over a low base.
fn activity_profile(t: f64, peak_hour: u32) -> f64 {
    let center = f64::from(peak_hour) + 0.5;
    0.05 + 0.95 * (1.0 - (t - center).abs() / 10.0).max(0.0)
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent deterministic stream per (seed, user, day, channel).
fn stream(seed: u64, user_index: usize, day: u64, channel: u64) -> ChaCha8Rng {
    let s = mix64(mix64(seed ^ mix64(user_index as u64)) ^ mix64(day) ^ channel);
    ChaCha8Rng::seed_from_u64(s)
}

fn user_offset(spec: &CorpusSpec, user_index: usize) -> f64 {
    let sigma = spec.noise_sigma / 2.0;
    if sigma == 0.0 {
        return 0.0;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma checked");
    normal.sample(&mut stream(spec.seed, user_index, u64::MAX, 2))
}

fn user_id(user_index: usize) -> String {
    format!("u{user_index:04}")
}

/// Generate one user's labeled heart-rate days: template plus Gaussian
/// slot noise plus the user offset, deterministic in (seed, user, day).
pub fn gen_user(
    pattern: PatternLabel,
    spec: &CorpusSpec,
    user_index: usize,
) -> Result<Vec<FixedSeries>, SynthError> {
    spec.validate()?;
    let slots = slots_per_day(spec.cadence_minutes)?;
    let offset = user_offset(spec, user_index);
    let hours_per_slot = f64::from(spec.cadence_minutes) / 60.0;
    let mut days = Vec::with_capacity(spec.days_per_user);
    for day in 0..spec.days_per_user {
        let date = spec
            .start_date
            .checked_add_days(Days::new(day as u64))
            .expect("date in range");
        let mut rng = stream(spec.seed, user_index, day as u64, 0);
        let noise = noise_dist(spec.noise_sigma);
        let values: Vec<f64> = (0..slots)
            .map(|i| {
                let t = i as f64 * hours_per_slot;
                let eps = noise.as_ref().map_or(0.0, |n| n.sample(&mut rng));
                (template_value(pattern, t) + offset + eps).clamp(0.0, 1.0)
            })
            .collect();
        days.push(FixedSeries::new(
            user_id(user_index),
            date,
            values,
            spec.cadence_minutes,
            1.0,
            true,
        )?);
    }
    Ok(days)
}

fn noise_dist(sigma: f64) -> Option<Normal<f64>> {
    (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("sigma checked"))
}

fn gen_user_steps(spec: &CorpusSpec, user_index: usize) -> Result<Vec<FixedSeries>, SynthError> {
    let slots = slots_per_day(spec.cadence_minutes)?;
    let hours_per_slot = f64::from(spec.cadence_minutes) / 60.0;
    let slot_scale = f64::from(spec.cadence_minutes) / 30.0;
    let mut days = Vec::with_capacity(spec.days_per_user);
    for day in 0..spec.days_per_user {
        let date = spec
            .start_date
            .checked_add_days(Days::new(day as u64))
            .expect("date in range");
        let weekend = chrono::Datelike::weekday(&date) == chrono::Weekday::Sun;
        let day_scale = if weekend {
            spec.weekend_activity_scale
        } else {
            1.0
        };
        let mut rng = stream(spec.seed, user_index, day as u64, 1);
        let noise = noise_dist(spec.noise_sigma);
        let values: Vec<f64> = (0..slots)
            .map(|i| {
                let t = i as f64 * hours_per_slot;
                let base = STEPS_PEAK_PER_HALF_HOUR
                    * slot_scale
                    * activity_profile(t, spec.activity_peak_hour)
                    * day_scale;
                let eps = noise.as_ref().map_or(0.0, |n| n.sample(&mut rng));
                (base * (1.0 + eps)).max(0.0)
            })
            .collect();
        days.push(FixedSeries::new(
            user_id(user_index),
            date,
            values,
            spec.cadence_minutes,
            1.0,
            false,
        )?);
    }
    Ok(days)
}

/// Largest-remainder allocation of `n` users over the mix fractions;
/// remainder ties resolve in label precedence order.
pub fn allocate_counts(
    mix: &BTreeMap<PatternLabel, f64>,
    n: usize,
) -> BTreeMap<PatternLabel, usize> {
    let mut counts: BTreeMap<PatternLabel, usize> = BTreeMap::new();
    let mut remainders: Vec<(PatternLabel, f64)> = Vec::new();
    let mut assigned = 0usize;
    for (&label, &fraction) in mix {
        let quota = fraction * n as f64;
        let floor = quota.floor() as usize;
        counts.insert(label, floor);
        assigned += floor;
        remainders.push((label, quota - floor as f64));
    }
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for (label, _) in remainders.into_iter().cycle().take(n - assigned) {
        *counts.entry(label).or_insert(0) += 1;
    }
    counts
}

/// A generated corpus pair with its planted per-user labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedCorpus {
    /// Normalized heart-rate user-days.
    pub heart: Corpus,
    /// Raw step counts for the same users and days.
    pub steps: Corpus,
    pub planted: BTreeMap<String, PatternLabel>,
}

impl PlantedCorpus {
    /// Planted label per heart-rate series, aligned with `heart.series`.
    pub fn planted_series_labels(&self) -> Vec<PatternLabel> {
        self.heart
            .series
            .iter()
            .map(|s| self.planted[&s.user_id])
            .collect()
    }
}

/// Generate the full corpus: users are allocated to patterns by largest
/// remainder and assigned in precedence order by index.
pub fn gen_corpus(spec: &CorpusSpec) -> Result<PlantedCorpus, SynthError> {
    spec.validate()?;
    let counts = allocate_counts(&spec.pattern_mix, spec.n_users);
    let mut planted = BTreeMap::new();
    let mut heart_series = Vec::new();
    let mut steps_series = Vec::new();
    let mut user_index = 0usize;
    for (&label, &count) in &counts {
        for _ in 0..count {
            planted.insert(user_id(user_index), label);
            heart_series.extend(gen_user(label, spec, user_index)?);
            steps_series.extend(gen_user_steps(spec, user_index)?);
            user_index += 1;
        }
    }
    Ok(PlantedCorpus {
        heart: Corpus::new(SensorKind::HeartRate, heart_series)?,
        steps: Corpus::new(SensorKind::Steps, steps_series)?,
        planted,
    })
}

/// Labels sidecar: `user_id,planted_pattern`.
pub fn write_labels_csv<W: Write>(
    planted: &BTreeMap<String, PatternLabel>,
    mut writer: W,
) -> std::io::Result<()> {
    writeln!(writer, "user_id,planted_pattern")?;
    for (user, label) in planted {
        writeln!(writer, "{user},{}", label.as_str())?;
    }
    Ok(())
}

pub fn read_labels_csv<R: Read>(
    reader: R,
) -> Result<BTreeMap<String, PatternLabel>, SynthError> {
    let reader = BufReader::new(reader);
    let mut planted = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| SynthError::LabelsFormat {
            line: line_no,
            message: e.to_string(),
        })?;
        let text = line.trim();
        if text.is_empty() || (line_no == 1 && text == "user_id,planted_pattern") {
            continue;
        }
        let (user, label) = text.split_once(',').ok_or(SynthError::LabelsFormat {
            line: line_no,
            message: "expected user_id,planted_pattern".into(),
        })?;
        let label = PatternLabel::parse(label.trim()).ok_or(SynthError::LabelsFormat {
            line: line_no,
            message: format!("unknown pattern {label:?}"),
        })?;
        planted.insert(user.trim().to_string(), label);
    }
    Ok(planted)
}
