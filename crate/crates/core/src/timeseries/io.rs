//! Corpus CSV serialization: `user_id,date,slot_0..slot_{L-1},coverage`.

use super::{Corpus, FixedSeries, SensorKind, TimeSeriesError};
use chrono::NaiveDate;
use std::io::{BufRead, BufReader, Read, Write};

fn header(slot_len: usize) -> String {
    let mut cols = Vec::with_capacity(slot_len + 3);
    cols.push("user_id".to_string());
    cols.push("date".to_string());
    for i in 0..slot_len {
        cols.push(format!("slot_{i}"));
    }
    cols.push("coverage".to_string());
    cols.join(",")
}

/// Write a corpus in the canonical CSV layout, series order preserved.
pub fn write_corpus_csv<W: Write>(corpus: &Corpus, mut writer: W) -> std::io::Result<()> {
    writeln!(writer, "{}", header(corpus.slot_len()))?;
    for series in &corpus.series {
        let mut fields = Vec::with_capacity(series.slot_len() + 3);
        fields.push(series.user_id.clone());
        fields.push(series.local_date.to_string());
        for v in &series.slots {
            fields.push(format_value(*v));
        }
        fields.push(format_value(series.coverage));
        writeln!(writer, "{}", fields.join(","))?;
    }
    Ok(())
}

// Shortest round-trip float text keeps files byte-stable across runs.
fn format_value(v: f64) -> String {
    format!("{v}")
}

/// Read a corpus written by [`write_corpus_csv`]. The sensor kind and
/// normalized flag are not part of the file and must be supplied.
pub fn read_corpus_csv<R: Read>(
    reader: R,
    kind: SensorKind,
    normalized: bool,
) -> Result<Corpus, TimeSeriesError> {
    let reader = BufReader::new(reader);
    let mut lines = reader.lines().enumerate();
    let (_, header_line) = lines.next().ok_or(TimeSeriesError::InvalidCorpus(
        "empty corpus file".into(),
    ))?;
    let header_line = header_line.map_err(|e| TimeSeriesError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let columns = header_line.split(',').count();
    if columns < 4 || !header_line.starts_with("user_id,date,slot_0") {
        return Err(TimeSeriesError::Parse {
            line: 1,
            message: "expected corpus header user_id,date,slot_0..,coverage".into(),
        });
    }
    let slot_len = columns - 3;
    let slot_minutes = super::MINUTES_PER_DAY / slot_len as u32;

    let mut series = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| TimeSeriesError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns {
            return Err(TimeSeriesError::Parse {
                line: line_no,
                message: format!("expected {columns} fields, got {}", fields.len()),
            });
        }
        let local_date =
            NaiveDate::parse_from_str(fields[1], "%Y-%m-%d").map_err(|_| TimeSeriesError::Parse {
                line: line_no,
                message: format!("invalid date {:?}", fields[1]),
            })?;
        let mut slots = Vec::with_capacity(slot_len);
        for raw in &fields[2..2 + slot_len] {
            slots.push(parse_float(raw, line_no)?);
        }
        let coverage = parse_float(fields[columns - 1], line_no)?;
        series.push(
            FixedSeries::new(
                fields[0].to_string(),
                local_date,
                slots,
                slot_minutes,
                coverage,
                normalized,
            )
            .map_err(|e| TimeSeriesError::Parse {
                line: line_no,
                message: e.to_string(),
            })?,
        );
    }
    Corpus::new(kind, series)
}

fn parse_float(raw: &str, line: usize) -> Result<f64, TimeSeriesError> {
    raw.parse().map_err(|_| TimeSeriesError::Parse {
        line,
        message: format!("invalid number {raw:?}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn corpus() -> Corpus {
        let mk = |user: &str, day: u32, base: f64| {
            FixedSeries::new(
                user.into(),
                NaiveDate::from_ymd_opt(2021, 7, day).unwrap(),
                (0..48).map(|i| base + f64::from(i) * 0.125).collect(),
                30,
                0.75,
                false,
            )
            .unwrap()
        };
        Corpus::new(
            SensorKind::HeartRate,
            vec![mk("u1", 1, 60.0), mk("u1", 2, 58.5), mk("u2", 1, 71.25)],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let original = corpus();
        let mut buf = Vec::new();
        write_corpus_csv(&original, &mut buf).unwrap();
        let read = read_corpus_csv(buf.as_slice(), SensorKind::HeartRate, false).unwrap();
        assert_eq!(read, original);
    }

    #[test]
    fn write_is_deterministic() {
        let c = corpus();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_corpus_csv(&c, &mut a).unwrap();
        write_corpus_csv(&c, &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn header_mismatch_is_reported() {
        let err = read_corpus_csv("nope\n".as_bytes(), SensorKind::Steps, false).unwrap_err();
        assert!(matches!(err, TimeSeriesError::Parse { line: 1, .. }));
    }

    #[test]
    fn bad_row_reports_line() {
        let mut buf = Vec::new();
        write_corpus_csv(&corpus(), &mut buf).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("u3,2021-07-01,oops\n");
        let err = read_corpus_csv(text.as_bytes(), SensorKind::HeartRate, false).unwrap_err();
        assert!(matches!(err, TimeSeriesError::Parse { line: 5, .. }), "{err}");
    }
}
