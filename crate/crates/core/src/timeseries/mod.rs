//! Raw sensor records, per-user day slicing, fixed-grid resampling, and
//! value normalization.

mod daily;
mod filter;
mod io;
mod parse;

pub use daily::{build_daily_corpus, denormalize, normalize, resample, slice_days, window_slice};
pub use filter::{night_shift_filter, NightShiftPartition};
pub use io::{read_corpus_csv, write_corpus_csv};
pub use parse::{parse_samples, InputFormat};

use chrono::NaiveDate;
use std::collections::BTreeMap;
use thiserror::Error;

pub const MINUTES_PER_DAY: u32 = 1440;
pub const MS_PER_DAY: i64 = 86_400_000;

/// Default heart-rate normalization bounds in bpm.
pub const DEFAULT_NORMALIZE_LO: f64 = 31.0;
pub const DEFAULT_NORMALIZE_HI: f64 = 245.0;

#[derive(Debug, Error, PartialEq)]
pub enum TimeSeriesError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown sensor kind {kind:?}")]
    UnknownKind { line: usize, kind: String },
    #[error("no samples to slice")]
    EmptyInput,
    #[error("day has no samples")]
    EmptyDay,
    #[error("slot_minutes {0} does not divide 1440")]
    InvalidSlotMinutes(u32),
    #[error("utc offset {0} minutes outside [-720, 840]")]
    InvalidOffset(i32),
    #[error("day samples mix sensor kinds")]
    MixedKinds,
    #[error("day samples mix users or dates")]
    MixedDays,
    #[error("invalid normalization range: lo {lo} >= hi {hi}")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("series is already normalized")]
    AlreadyNormalized,
    #[error("window hours [{start_hour}, {end_hour}) invalid or misaligned for {slot_minutes}-minute slots")]
    MisalignedWindow {
        start_hour: u32,
        end_hour: u32,
        slot_minutes: u32,
    },
    #[error("series invariant violated: {0}")]
    InvalidSeries(String),
    #[error("corpus invariant violated: {0}")]
    InvalidCorpus(String),
}

/// Which physical sensor a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum SensorKind {
    HeartRate,
    Steps,
}

impl SensorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SensorKind::HeartRate => "hr",
            SensorKind::Steps => "steps",
        }
    }

    pub fn parse(text: &str) -> Option<SensorKind> {
        match text {
            "hr" => Some(SensorKind::HeartRate),
            "steps" => Some(SensorKind::Steps),
            _ => None,
        }
    }
}

/// One timestamped sensor reading for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub user_id: String,
    /// Epoch milliseconds UTC; strictly positive.
    pub timestamp_ms: i64,
    pub kind: SensorKind,
    /// bpm for heart rate, step-count delta for steps; non-negative.
    pub value: f64,
}

/// Fixed per-user UTC offsets used when assigning samples to local days.
///
/// The corpus metadata supplies one offset per user; users without an
/// entry fall back to the default (zero unless configured).
#[derive(Debug, Clone, Default)]
pub struct OffsetPolicy {
    default_minutes: i32,
    per_user: BTreeMap<String, i32>,
}

impl OffsetPolicy {
    pub fn new(default_minutes: i32) -> Result<Self, TimeSeriesError> {
        check_offset(default_minutes)?;
        Ok(OffsetPolicy {
            default_minutes,
            per_user: BTreeMap::new(),
        })
    }

    pub fn with_user(mut self, user_id: &str, offset_minutes: i32) -> Result<Self, TimeSeriesError> {
        check_offset(offset_minutes)?;
        self.per_user.insert(user_id.to_string(), offset_minutes);
        Ok(self)
    }

    pub fn offset_minutes(&self, user_id: &str) -> i32 {
        self.per_user
            .get(user_id)
            .copied()
            .unwrap_or(self.default_minutes)
    }
}

fn check_offset(minutes: i32) -> Result<(), TimeSeriesError> {
    if !(-720..=840).contains(&minutes) {
        return Err(TimeSeriesError::InvalidOffset(minutes));
    }
    Ok(())
}

/// Local calendar day plus the fixed offset that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DayWindow {
    pub local_date: NaiveDate,
    pub utc_offset_minutes: i32,
}

/// One raw reading positioned inside its local day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayPoint {
    pub ms_of_day: i64,
    pub kind: SensorKind,
    pub value: f64,
}

/// All raw samples one user produced on one local day, time-ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct DaySlice {
    pub user_id: String,
    pub window: DayWindow,
    pub points: Vec<DayPoint>,
}

impl DaySlice {
    /// Copy of this slice restricted to one sensor kind.
    pub fn of_kind(&self, kind: SensorKind) -> DaySlice {
        DaySlice {
            user_id: self.user_id.clone(),
            window: self.window,
            points: self
                .points
                .iter()
                .copied()
                .filter(|p| p.kind == kind)
                .collect(),
        }
    }
}

/// One user-day resampled onto a fixed slot grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FixedSeries {
    pub user_id: String,
    pub local_date: NaiveDate,
    pub slots: Vec<f64>,
    pub slot_minutes: u32,
    /// Fraction of slots backed by at least one raw sample before imputation.
    pub coverage: f64,
    pub normalized: bool,
}

impl FixedSeries {
    pub fn new(
        user_id: String,
        local_date: NaiveDate,
        slots: Vec<f64>,
        slot_minutes: u32,
        coverage: f64,
        normalized: bool,
    ) -> Result<Self, TimeSeriesError> {
        slots_per_day(slot_minutes).and_then(|expected| {
            if slots.len() != expected {
                return Err(TimeSeriesError::InvalidSeries(format!(
                    "expected {expected} slots for {slot_minutes}-minute cadence, got {}",
                    slots.len()
                )));
            }
            if !(0.0..=1.0).contains(&coverage) {
                return Err(TimeSeriesError::InvalidSeries(format!(
                    "coverage {coverage} outside [0, 1]"
                )));
            }
            if normalized && slots.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(TimeSeriesError::InvalidSeries(
                    "normalized series has values outside [0, 1]".into(),
                ));
            }
            Ok(FixedSeries {
                user_id,
                local_date,
                slots,
                slot_minutes,
                coverage,
                normalized,
            })
        })
    }

    pub fn slot_len(&self) -> usize {
        self.slots.len()
    }
}

/// Number of slots a cadence produces, checking divisibility.
pub fn slots_per_day(slot_minutes: u32) -> Result<usize, TimeSeriesError> {
    if slot_minutes == 0 || MINUTES_PER_DAY % slot_minutes != 0 {
        return Err(TimeSeriesError::InvalidSlotMinutes(slot_minutes));
    }
    Ok((MINUTES_PER_DAY / slot_minutes) as usize)
}

/// Contiguous hour-aligned fragment of a daily series.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSlice {
    pub start_hour: u32,
    pub end_hour: u32,
    pub slot_minutes: u32,
    /// Day-level coverage inherited from the parent series.
    pub coverage: f64,
    pub values: Vec<f64>,
}

impl WindowSlice {
    pub fn duration_hours(&self) -> f64 {
        f64::from(self.end_hour - self.start_hour)
    }
}

/// A set of fixed-grid daily series sharing cadence and sensor kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub kind: SensorKind,
    pub series: Vec<FixedSeries>,
    /// Optional user metadata (region labels).
    pub regions: BTreeMap<String, String>,
}

impl Corpus {
    pub fn new(kind: SensorKind, series: Vec<FixedSeries>) -> Result<Self, TimeSeriesError> {
        if let Some(first) = series.first() {
            let len = first.slot_len();
            if series.iter().any(|s| s.slot_len() != len) {
                return Err(TimeSeriesError::InvalidCorpus(
                    "series have differing slot counts".into(),
                ));
            }
        }
        Ok(Corpus {
            kind,
            series,
            regions: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn slot_len(&self) -> usize {
        self.series.first().map_or(0, FixedSeries::slot_len)
    }

    pub fn slot_minutes(&self) -> u32 {
        self.series.first().map_or(0, |s| s.slot_minutes)
    }

    /// Slot values as one row per series, the clustering input layout.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.series.iter().map(|s| s.slots.clone()).collect()
    }

    /// Distinct user ids in first-appearance order.
    pub fn user_ids(&self) -> Vec<String> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for s in &self.series {
            if seen.insert(s.user_id.clone()) {
                out.push(s.user_id.clone());
            }
        }
        out
    }
}
