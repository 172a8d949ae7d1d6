//! Gesture domain types and their plain-text file formats.
//!
//! Three formats are read and written here, all UTF-8 comma separated text
//! with a header row:
//!
//! * gesture files: `gesture,start,end`, seconds as decimals
//! * probability files: `t,<code1>,...,<codek>`, one row per frame
//! * outcome files: `case_id,outcome` with outcome 0 or 1

mod alphabet;
mod outcome;
mod sequence;
mod stream;

use std::io::Read;
use std::path::Path;

pub use alphabet::{GestureAlphabet, DEFAULT_CODES, EXCLUDED_CODE};
pub use outcome::{parse_outcome_table, read_outcome_table, Outcome, OutcomeTable};
pub use sequence::{
    frame_labels_from_sequence, parse_gesture_sequence, read_gesture_sequence, Gesture,
    GestureEvent, GestureSequence, ParseOptions, UnknownPolicy,
};
pub use stream::{
    parse_probability_stream, read_probability_stream, FrameProbabilityStream, DEFAULT_DT,
};

use crate::error::{Error, Result};

/// Case identifier derived from a file name (`cases/vid_07.csv` -> `vid_07`).
pub fn case_id_from_path(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub(crate) fn validate_case_id(case_id: &str) -> Result<()> {
    if case_id.is_empty() || case_id.chars().any(|c| matches!(c, ',' | '"' | '\n' | '\r')) {
        return Err(Error::validation(format!("invalid case id {case_id:?}")));
    }
    Ok(())
}

/// Reads non-empty CSV records, keeping their 1-based line numbers.
pub(crate) fn read_records<R: Read>(
    reader: R,
    context: &str,
) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(context, line, e.to_string())
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let line = record.position().map_or(0, |p| p.line());
        out.push((line, record));
    }
    Ok(out)
}

pub(crate) fn parse_f64(field: &str, context: &str, line: u64, what: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(context, line, format!("{what}: cannot parse {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(context, line, format!("{what}: non-finite value")));
    }
    Ok(v)
}

pub(crate) fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}
