//! Temporal aggregation profiles over hour, weekday, day-of-month, and
//! month buckets.

use super::StatsError;
use crate::timeseries::Corpus;
use chrono::Datelike;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BucketKind {
    HourOfDay,
    DayOfWeek,
    DayOfMonth,
    MonthOfYear,
}

impl BucketKind {
    pub fn domain_size(self) -> usize {
        match self {
            BucketKind::HourOfDay => 24,
            BucketKind::DayOfWeek => 7,
            BucketKind::DayOfMonth => 31,
            BucketKind::MonthOfYear => 12,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BucketKind::HourOfDay => "hour-of-day",
            BucketKind::DayOfWeek => "day-of-week",
            BucketKind::DayOfMonth => "day-of-month",
            BucketKind::MonthOfYear => "month-of-year",
        }
    }

    pub fn parse(text: &str) -> Option<BucketKind> {
        [
            BucketKind::HourOfDay,
            BucketKind::DayOfWeek,
            BucketKind::DayOfMonth,
            BucketKind::MonthOfYear,
        ]
        .into_iter()
        .find(|k| k.as_str() == text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BucketStat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Fixed-domain aggregation: 24/7/31/12 buckets with populated entries
/// carrying mean, population standard deviation, and sample count.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TemporalProfile {
    pub kind: BucketKind,
    pub buckets: Vec<Option<BucketStat>>,
}

impl TemporalProfile {
    /// Bucket index with the highest mean (ties to the lowest index).
    pub fn argmax_bucket(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, stat) in self.buckets.iter().enumerate() {
            if let Some(s) = stat {
                if best.is_none_or(|(_, m)| s.mean > m) {
                    best = Some((i, s.mean));
                }
            }
        }
        best.map(|(i, _)| i)
    }

    /// Plot-ready CSV: `bucket,mean,std,n` covering the whole domain;
    /// unpopulated buckets leave mean/std empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bucket,mean,std,n\n");
        for (i, stat) in self.buckets.iter().enumerate() {
            match stat {
                Some(s) => out.push_str(&format!("{i},{},{},{}\n", s.mean, s.std, s.n)),
                None => out.push_str(&format!("{i},,,0\n")),
            }
        }
        out
    }
}

/// Aggregate every slot value of the corpus into the bucket its local
/// time falls in. Values are used as stored (raw bpm or step counts).
pub fn temporal_aggregate(corpus: &Corpus, kind: BucketKind) -> Result<TemporalProfile, StatsError> {
    if corpus.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let size = kind.domain_size();
    let mut sums = vec![0.0f64; size];
    let mut squares = vec![0.0f64; size];
    let mut counts = vec![0usize; size];
    for series in &corpus.series {
        for (slot, &value) in series.slots.iter().enumerate() {
            let bucket = match kind {
                BucketKind::HourOfDay => (slot as u32 * series.slot_minutes / 60) as usize,
                BucketKind::DayOfWeek => {
                    series.local_date.weekday().num_days_from_monday() as usize
                }
                BucketKind::DayOfMonth => (series.local_date.day() - 1) as usize,
                BucketKind::MonthOfYear => (series.local_date.month() - 1) as usize,
            };
            sums[bucket] += value;
            squares[bucket] += value * value;
            counts[bucket] += 1;
        }
    }
    let buckets = (0..size)
        .map(|i| {
            if counts[i] == 0 {
                return None;
            }
            let n = counts[i] as f64;
            let mean = sums[i] / n;
            let var = (squares[i] / n - mean * mean).max(0.0);
            Some(BucketStat {
                mean,
                std: var.sqrt(),
                n: counts[i],
            })
        })
        .collect();
    Ok(TemporalProfile { kind, buckets })
}
