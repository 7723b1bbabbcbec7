//! CSV file formats.
//!
//! * **Feature files**: a `time` column plus one column per feature, sampled
//!   on a uniform grid; empty cells and `nan` are missing values.
//! * **Segment files**: `start,end` rows of speech segments, sorted and
//!   non-overlapping.
//! * **Annotation files**: manually labelled exchanges keyed by onset time.
//! * **Exchange files**: one classified exchange per row, across sessions.
//!
//! Loaders report the 1-based data row and the column of the first problem;
//! writers format floats with Rust's shortest round-trip representation, so
//! a write–load cycle reproduces values exactly.

use std::io::Cursor;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exchange::AnnotationRow;
use crate::model::{
    Anchors, Exchange, ExchangeSource, ExchangeType, FeatureTrack, Intent, IntentDetail, Outcome,
    Segment, SessionRecord,
};

use super::{io_error, parse_error};

/// Sampling rates this close to an integer are snapped to it, absorbing
/// rounding noise in printed timestamps.
const RATE_SNAP_TOL: f64 = 1e-6;
/// Allowed relative deviation of each sampling step from the mean step.
const STEP_REL_TOL: f64 = 1e-4;

const SEGMENT_HEADER: [&str; 2] = ["start", "end"];
const ANNOTATION_HEADER: [&str; 6] = [
    "time",
    "type",
    "outcome",
    "intent",
    "intent_detail",
    "initiator_id",
];
const EXCHANGE_HEADER: [&str; 13] = [
    "session_id",
    "speaker_id",
    "initiator_id",
    "type",
    "outcome",
    "intent",
    "intent_detail",
    "t1",
    "t2",
    "t3",
    "t4",
    "overlap",
    "source",
];

type CsvReader = csv::Reader<Cursor<String>>;

fn open_reader(path: &Path) -> Result<CsvReader> {
    let content = std::fs::read_to_string(path).map_err(io_error(path))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(Cursor::new(content)))
}

fn read_headers(path: &Path, reader: &mut CsvReader) -> Result<Vec<String>> {
    let headers = reader
        .headers()
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    Ok(headers.iter().map(|h| h.trim().to_string()).collect())
}

fn expect_header(path: &Path, reader: &mut CsvReader, expected: &[&str]) -> Result<()> {
    let found = read_headers(path, reader)?;
    if found != expected {
        return Err(Error::InvalidInput(format!(
            "{}: expected header \"{}\", found \"{}\"",
            path.display(),
            expected.join(","),
            found.join(",")
        )));
    }
    Ok(())
}

fn read_record(
    path: &Path,
    row: usize,
    record: std::result::Result<csv::StringRecord, csv::Error>,
) -> Result<csv::StringRecord> {
    record.map_err(|e| parse_error(path, row, format!("malformed record: {e}")))
}

fn parse_float(path: &Path, row: usize, column: &str, raw: &str) -> Result<f64> {
    let raw = raw.trim();
    let v: f64 = raw
        .parse()
        .map_err(|_| parse_error(path, row, format!("column {column:?}: invalid number {raw:?}")))?;
    if !v.is_finite() {
        return Err(parse_error(
            path,
            row,
            format!("column {column:?}: non-finite number {raw:?}"),
        ));
    }
    Ok(v)
}

fn parse_token<T: FromStr<Err = Error>>(
    path: &Path,
    row: usize,
    column: &str,
    raw: &str,
) -> Result<T> {
    T::from_str(raw.trim()).map_err(|e| parse_error(path, row, format!("column {column:?}: {e}")))
}

fn format_float(v: f64) -> String {
    v.to_string()
}

fn finish_writer(path: &Path, writer: csv::Writer<Vec<u8>>) -> Result<()> {
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Internal(format!("CSV serialization failed: {e}")))?;
    std::fs::write(path, bytes).map_err(io_error(path))
}

fn write_row<I, S>(writer: &mut csv::Writer<Vec<u8>>, fields: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    writer
        .write_record(fields)
        .map_err(|e| Error::Internal(format!("CSV serialization failed: {e}")))
}

// ---------------------------------------------------------------------------
// Feature files
// ---------------------------------------------------------------------------

/// Load every feature column of a CSV file as tracks owned by
/// `participant_id`. The file needs a strictly increasing, uniformly spaced
/// `time` column and at least two rows; the sampling rate is inferred from
/// the mean step and snapped to an integer when within `1e-6`.
pub fn load_feature_csv(path: &Path, participant_id: &str) -> Result<Vec<FeatureTrack>> {
    let mut reader = open_reader(path)?;
    let names = read_headers(path, &mut reader)?;
    if names.first().map(String::as_str) != Some("time") {
        return Err(Error::InvalidInput(format!(
            "{}: first column must be \"time\", found {:?}",
            path.display(),
            names.first().cloned().unwrap_or_default()
        )));
    }
    let features = &names[1..];
    if features.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: a feature file needs at least one feature column besides \"time\"",
            path.display()
        )));
    }
    for (i, f) in features.iter().enumerate() {
        if f.is_empty() {
            return Err(Error::InvalidInput(format!(
                "{}: column {} has an empty feature name",
                path.display(),
                i + 2
            )));
        }
        if features[..i].contains(f) {
            return Err(Error::InvalidInput(format!(
                "{}: duplicate feature column {f:?}",
                path.display()
            )));
        }
    }

    let mut times: Vec<f64> = Vec::new();
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); features.len()];
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = read_record(path, row, record)?;
        let t = parse_float(path, row, "time", record.get(0).unwrap_or(""))?;
        if let Some(&prev) = times.last() {
            if !(t > prev) {
                return Err(parse_error(
                    path,
                    row,
                    format!("time must increase strictly: {t} follows {prev}"),
                ));
            }
        }
        times.push(t);
        for (j, name) in features.iter().enumerate() {
            let raw = record.get(j + 1).unwrap_or("").trim();
            let v = if raw.is_empty() || raw.eq_ignore_ascii_case("nan") {
                None
            } else {
                Some(parse_float(path, row, name, raw)?)
            };
            columns[j].push(v);
        }
    }

    let n = times.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "{}: a feature file needs at least 2 rows to define a sampling rate, found {n}",
            path.display()
        )));
    }
    let step = (times[n - 1] - times[0]) / (n - 1) as f64;
    for i in 1..n {
        let d = times[i] - times[i - 1];
        if (d - step).abs() > STEP_REL_TOL * step {
            return Err(parse_error(
                path,
                i + 1,
                format!("sampling step varies: {d} here, {step} on average"),
            ));
        }
    }
    let mut rate = 1.0 / step;
    if (rate - rate.round()).abs() < RATE_SNAP_TOL {
        rate = rate.round();
    }

    Ok(features
        .iter()
        .zip(columns)
        .map(|(name, values)| FeatureTrack {
            participant_id: participant_id.to_string(),
            feature_name: name.clone(),
            sample_rate_hz: rate,
            start_time: times[0],
            values,
        })
        .collect())
}

/// Write tracks into one feature CSV. All tracks must share the sampling
/// rate, start time and length (they form the columns of a single grid).
pub fn write_feature_csv(path: &Path, tracks: &[FeatureTrack]) -> Result<()> {
    let first = tracks.first().ok_or_else(|| {
        Error::InvalidInput("cannot write a feature file without tracks".to_string())
    })?;
    for t in &tracks[1..] {
        if t.sample_rate_hz != first.sample_rate_hz
            || t.start_time != first.start_time
            || t.values.len() != first.values.len()
        {
            return Err(Error::InvalidInput(format!(
                "tracks in one feature file must share rate, start and length; \
                 {:?} differs from {:?}",
                t.feature_name, first.feature_name
            )));
        }
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["time".to_string()];
    header.extend(tracks.iter().map(|t| t.feature_name.clone()));
    write_row(&mut writer, &header)?;
    for i in 0..first.values.len() {
        let mut record = vec![format_float(first.time_at(i))];
        for t in tracks {
            record.push(t.values[i].map(format_float).unwrap_or_default());
        }
        write_row(&mut writer, &record)?;
    }
    finish_writer(path, writer)
}

// ---------------------------------------------------------------------------
// Segment files
// ---------------------------------------------------------------------------

/// Load a `start,end` CSV of speech segments: non-negative starts, positive
/// durations, sorted, non-overlapping (touching segments are allowed). A
/// header-only file yields an empty sequence.
pub fn load_segments_csv(path: &Path) -> Result<Vec<Segment>> {
    let mut reader = open_reader(path)?;
    expect_header(path, &mut reader, &SEGMENT_HEADER)?;
    let mut out: Vec<Segment> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = read_record(path, row, record)?;
        let start = parse_float(path, row, "start", record.get(0).unwrap_or(""))?;
        let end = parse_float(path, row, "end", record.get(1).unwrap_or(""))?;
        if start < 0.0 {
            return Err(parse_error(
                path,
                row,
                format!("segment start must be non-negative, found {start}"),
            ));
        }
        if !(start < end) {
            return Err(parse_error(
                path,
                row,
                format!("segment must have positive duration, found {start} .. {end}"),
            ));
        }
        if let Some(prev) = out.last() {
            if start < prev.end {
                return Err(parse_error(
                    path,
                    row,
                    format!(
                        "segments must be sorted and non-overlapping: \
                         {start} begins before the previous segment ends at {}",
                        prev.end
                    ),
                ));
            }
        }
        out.push(Segment::new(start, end));
    }
    Ok(out)
}

/// Write segments as a `start,end` CSV.
pub fn write_segments_csv(path: &Path, segments: &[Segment]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    write_row(&mut writer, SEGMENT_HEADER)?;
    for s in segments {
        write_row(&mut writer, [format_float(s.start), format_float(s.end)])?;
    }
    finish_writer(path, writer)
}

// ---------------------------------------------------------------------------
// Annotation files
// ---------------------------------------------------------------------------

/// Load manual exchange annotations, sorted by time. The `outcome` and
/// `intent` columns may be empty (unknown); `intent_detail` may be empty or
/// must agree with `intent`.
pub fn load_annotations_csv(path: &Path) -> Result<Vec<AnnotationRow>> {
    let mut reader = open_reader(path)?;
    expect_header(path, &mut reader, &ANNOTATION_HEADER)?;
    let mut out: Vec<AnnotationRow> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = read_record(path, row, record)?;
        let time = parse_float(path, row, "time", record.get(0).unwrap_or(""))?;
        let kind: ExchangeType = parse_token(path, row, "type", record.get(1).unwrap_or(""))?;
        let outcome: Outcome = parse_token(path, row, "outcome", record.get(2).unwrap_or(""))?;
        let intent: Intent = parse_token(path, row, "intent", record.get(3).unwrap_or(""))?;
        let detail_raw = record.get(4).unwrap_or("").trim();
        let intent_detail = if detail_raw.is_empty() {
            None
        } else {
            Some(parse_token::<IntentDetail>(path, row, "intent_detail", detail_raw)?)
        };
        let initiator_id = record.get(5).unwrap_or("").trim().to_string();
        if initiator_id.is_empty() {
            return Err(parse_error(path, row, "column \"initiator_id\": must not be empty"));
        }
        let ann = AnnotationRow {
            time,
            kind,
            outcome,
            intent,
            intent_detail,
            initiator_id,
        };
        ann.validate()
            .map_err(|e| parse_error(path, row, e.to_string()))?;
        if let Some(prev) = out.last() {
            if time < prev.time {
                return Err(parse_error(
                    path,
                    row,
                    format!("annotations must be sorted by time: {time} follows {}", prev.time),
                ));
            }
        }
        out.push(ann);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Exchange files
// ---------------------------------------------------------------------------

/// Write every exchange of every session into one CSV, one row per
/// exchange, in session order.
pub fn write_exchanges_csv(path: &Path, sessions: &[SessionRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    write_row(&mut writer, EXCHANGE_HEADER)?;
    for s in sessions {
        for e in &s.exchanges {
            write_row(
                &mut writer,
                [
                    s.session_id.clone(),
                    e.speaker_id.clone(),
                    e.initiator_id.clone(),
                    e.kind.to_string(),
                    e.outcome.to_string(),
                    e.intent.to_string(),
                    e.intent_detail.map(|d| d.to_string()).unwrap_or_default(),
                    format_float(e.anchors.t1),
                    format_float(e.anchors.t2),
                    format_float(e.anchors.t3),
                    format_float(e.anchors.t4),
                    format_float(e.overlap),
                    e.source.to_string(),
                ],
            )?;
        }
    }
    finish_writer(path, writer)
}

/// Load an exchange CSV back as `(session_id, exchange)` pairs, checking
/// anchor ordering, overlap consistency and intent coherence.
pub fn load_exchanges_csv(path: &Path) -> Result<Vec<(String, Exchange)>> {
    let mut reader = open_reader(path)?;
    expect_header(path, &mut reader, &EXCHANGE_HEADER)?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = read_record(path, row, record)?;
        let field = |k: usize| record.get(k).unwrap_or("").trim();
        let session_id = field(0).to_string();
        let speaker_id = field(1).to_string();
        let initiator_id = field(2).to_string();
        for (name, v) in [
            ("session_id", &session_id),
            ("speaker_id", &speaker_id),
            ("initiator_id", &initiator_id),
        ] {
            if v.is_empty() {
                return Err(parse_error(path, row, format!("column {name:?}: must not be empty")));
            }
        }
        let kind: ExchangeType = parse_token(path, row, "type", field(3))?;
        let outcome: Outcome = parse_token(path, row, "outcome", field(4))?;
        let intent: Intent = parse_token(path, row, "intent", field(5))?;
        let intent_detail = if field(6).is_empty() {
            None
        } else {
            Some(parse_token::<IntentDetail>(path, row, "intent_detail", field(6))?)
        };
        if let Some(detail) = intent_detail {
            if intent != detail.implied_intent() {
                return Err(parse_error(
                    path,
                    row,
                    format!(
                        "intent_detail {detail} implies intent {}, found {intent}",
                        detail.implied_intent()
                    ),
                ));
            }
        }
        let anchors = Anchors {
            t1: parse_float(path, row, "t1", field(7))?,
            t2: parse_float(path, row, "t2", field(8))?,
            t3: parse_float(path, row, "t3", field(9))?,
            t4: parse_float(path, row, "t4", field(10))?,
        };
        if !(anchors.t1 < anchors.t2 && anchors.t3 < anchors.t4) {
            return Err(parse_error(
                path,
                row,
                format!(
                    "anchors must satisfy t1 < t2 and t3 < t4, found \
                     t1 = {}, t2 = {}, t3 = {}, t4 = {}",
                    anchors.t1, anchors.t2, anchors.t3, anchors.t4
                ),
            ));
        }
        let overlap = parse_float(path, row, "overlap", field(11))?;
        if (overlap - anchors.overlap()).abs() > 1e-9 {
            return Err(parse_error(
                path,
                row,
                format!(
                    "overlap {overlap} does not match the anchors (expected {})",
                    anchors.overlap()
                ),
            ));
        }
        let source: ExchangeSource = parse_token(path, row, "source", field(12))?;
        out.push((
            session_id,
            Exchange {
                speaker_id,
                initiator_id,
                kind,
                outcome,
                intent,
                intent_detail,
                anchors,
                overlap,
                source,
            },
        ));
    }
    Ok(out)
}
