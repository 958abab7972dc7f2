//! Raw sample ingestion from CSV and JSONL streams.

use super::{Sample, SensorKind, TimeSeriesError};
use std::io::{BufRead, BufReader, Read};

pub const CSV_HEADER: &str = "user_id,timestamp_ms,kind,value";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Jsonl,
}

#[derive(serde::Deserialize)]
struct JsonRecord {
    user_id: String,
    timestamp_ms: i64,
    kind: String,
    value: f64,
}

/// Parse raw sensor records, one per line, preserving input order.
///
/// CSV columns are `user_id,timestamp_ms,kind,value` with kind `hr` or
/// `steps`; an optional leading header row is skipped. JSONL objects carry
/// the same keys. Blank lines are ignored; anything else malformed fails
/// with its line number.
pub fn parse_samples<R: Read>(
    reader: R,
    format: InputFormat,
) -> Result<Vec<Sample>, TimeSeriesError> {
    let reader = BufReader::new(reader);
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| TimeSeriesError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        match format {
            InputFormat::Csv => {
                if line_no == 1 && text == CSV_HEADER {
                    continue;
                }
                samples.push(parse_csv_line(text, line_no)?);
            }
            InputFormat::Jsonl => samples.push(parse_json_line(text, line_no)?),
        }
    }
    Ok(samples)
}

fn parse_csv_line(text: &str, line: usize) -> Result<Sample, TimeSeriesError> {
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    if fields.len() != 4 {
        return Err(TimeSeriesError::Parse {
            line,
            message: format!("expected 4 comma-separated fields, got {}", fields.len()),
        });
    }
    let timestamp_ms: i64 = fields[1].parse().map_err(|_| TimeSeriesError::Parse {
        line,
        message: format!("invalid timestamp {:?}", fields[1]),
    })?;
    let kind = SensorKind::parse(fields[2]).ok_or_else(|| TimeSeriesError::UnknownKind {
        line,
        kind: fields[2].to_string(),
    })?;
    let value: f64 = fields[3].parse().map_err(|_| TimeSeriesError::Parse {
        line,
        message: format!("invalid value {:?}", fields[3]),
    })?;
    build_sample(fields[0].to_string(), timestamp_ms, kind, value, line)
}

fn parse_json_line(text: &str, line: usize) -> Result<Sample, TimeSeriesError> {
    let record: JsonRecord =
        serde_json::from_str(text).map_err(|e| TimeSeriesError::Parse {
            line,
            message: e.to_string(),
        })?;
    let kind = SensorKind::parse(&record.kind).ok_or(TimeSeriesError::UnknownKind {
        line,
        kind: record.kind,
    })?;
    build_sample(record.user_id, record.timestamp_ms, kind, record.value, line)
}

fn build_sample(
    user_id: String,
    timestamp_ms: i64,
    kind: SensorKind,
    value: f64,
    line: usize,
) -> Result<Sample, TimeSeriesError> {
    if user_id.is_empty() || user_id.contains(',') || user_id.contains('\n') {
        return Err(TimeSeriesError::Parse {
            line,
            message: format!("invalid user id {user_id:?}"),
        });
    }
    if timestamp_ms <= 0 {
        return Err(TimeSeriesError::Parse {
            line,
            message: format!("timestamp must be positive, got {timestamp_ms}"),
        });
    }
    if !value.is_finite() || value < 0.0 {
        return Err(TimeSeriesError::Parse {
            line,
            message: format!("value must be a non-negative number, got {value}"),
        });
    }
    Ok(Sample {
        user_id,
        timestamp_ms,
        kind,
        value,
    })
}
