//! Exclusion of users who are physically active during the sleep window.

use super::{window_slice, Corpus, TimeSeriesError};
use std::collections::BTreeMap;

pub const DEFAULT_NIGHT_STEP_THRESHOLD: f64 = 500.0;
pub const DEFAULT_NIGHT_DAY_FRACTION: f64 = 0.5;
const SLEEP_START_HOUR: u32 = 0;
const SLEEP_END_HOUR: u32 = 8;

/// Outcome of the night-activity screen over the heart-rate population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NightShiftPartition {
    pub retained: Vec<String>,
    pub excluded: Vec<String>,
    /// Retained users that could not be evaluated for lack of activity data.
    pub unevaluated: Vec<String>,
}

/// Partition heart-rate users by nighttime step activity.
///
/// A user is excluded when their total steps in the 12 a.m.-8 a.m. window
/// exceed `threshold_steps` on at least `day_fraction` of their recorded
/// activity days. Users with no activity data are retained and flagged.
pub fn night_shift_filter(
    heart: &Corpus,
    steps: &Corpus,
    threshold_steps: f64,
    day_fraction: f64,
) -> Result<NightShiftPartition, TimeSeriesError> {
    let mut night_days: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for series in &steps.series {
        let window = window_slice(series, SLEEP_START_HOUR, SLEEP_END_HOUR)?;
        let total: f64 = window.values.iter().sum();
        let entry = night_days.entry(series.user_id.as_str()).or_insert((0, 0));
        entry.0 += 1;
        if total > threshold_steps {
            entry.1 += 1;
        }
    }

    let mut partition = NightShiftPartition {
        retained: Vec::new(),
        excluded: Vec::new(),
        unevaluated: Vec::new(),
    };
    for user in heart.user_ids() {
        match night_days.get(user.as_str()) {
            Some(&(recorded, active)) => {
                let active_fraction = active as f64 / recorded as f64;
                if active_fraction >= day_fraction {
                    partition.excluded.push(user);
                } else {
                    partition.retained.push(user);
                }
            }
            None => {
                partition.unevaluated.push(user.clone());
                partition.retained.push(user);
            }
        }
    }
    Ok(partition)
}
