use std::cmp::Ordering;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{
    case_id_from_path, open, parse_f64, read_records, validate_case_id, GestureAlphabet,
    EXCLUDED_CODE,
};

const HEADER: [&str; 3] = ["gesture", "start", "end"];

/// Label carried by an annotated event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gesture {
    /// Index into the sequence's alphabet.
    Class(usize),
    /// Non-dominant gesture (`X`); kept in the file, dropped from analysis.
    Excluded,
}

impl Gesture {
    pub fn class(self) -> Option<usize> {
        match self {
            Gesture::Class(i) => Some(i),
            Gesture::Excluded => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GestureEvent {
    pub gesture: Gesture,
    pub start: f64,
    pub end: f64,
}

impl GestureEvent {
    pub fn new(gesture: Gesture, start: f64, end: f64) -> Self {
        Self {
            gesture,
            start,
            end,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.start
            .total_cmp(&other.start)
            .then(self.end.total_cmp(&other.end))
            .then(self.gesture.cmp(&other.gesture))
    }
}

/// What to do with codes that are neither in the alphabet nor `X`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum UnknownPolicy {
    #[default]
    Reject,
    Exclude,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub unknown: UnknownPolicy,
}

/// Ordered gesture events for one case.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureSequence {
    case_id: String,
    alphabet: GestureAlphabet,
    events: Vec<GestureEvent>,
}

impl GestureSequence {
    /// Validates the events and sorts them by (start, end, class).
    pub fn new(
        case_id: impl Into<String>,
        alphabet: GestureAlphabet,
        mut events: Vec<GestureEvent>,
    ) -> Result<Self> {
        let case_id = case_id.into();
        validate_case_id(&case_id)?;
        for ev in &events {
            if !(ev.start.is_finite() && ev.end.is_finite()) {
                return Err(Error::validation("non-finite event time"));
            }
            if ev.start < 0.0 {
                return Err(Error::validation(format!("negative start time {}", ev.start)));
            }
            if ev.end < ev.start {
                return Err(Error::validation(format!(
                    "event ends before it starts ({} < {})",
                    ev.end, ev.start
                )));
            }
            if let Gesture::Class(i) = ev.gesture {
                if i >= alphabet.len() {
                    return Err(Error::validation(format!("class index {i} outside alphabet")));
                }
            }
        }
        events.sort_by(GestureEvent::canonical_cmp);
        Ok(Self {
            case_id,
            alphabet,
            events,
        })
    }

    /// Builds a sequence from `(code, start, end)` triples.
    pub fn from_codes(
        case_id: impl Into<String>,
        alphabet: GestureAlphabet,
        events: &[(&str, f64, f64)],
    ) -> Result<Self> {
        let events = events
            .iter()
            .map(|&(code, start, end)| {
                let gesture = if code == EXCLUDED_CODE {
                    Gesture::Excluded
                } else {
                    Gesture::Class(alphabet.index_of(code).ok_or_else(|| {
                        Error::validation(format!("unknown gesture code {code:?}"))
                    })?)
                };
                Ok(GestureEvent::new(gesture, start, end))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(case_id, alphabet, events)
    }

    pub fn case_id(&self) -> &str {
        &self.case_id
    }

    pub fn with_case_id(mut self, case_id: impl Into<String>) -> Result<Self> {
        let case_id = case_id.into();
        validate_case_id(&case_id)?;
        self.case_id = case_id;
        Ok(self)
    }

    pub fn alphabet(&self) -> &GestureAlphabet {
        &self.alphabet
    }

    pub fn events(&self) -> &[GestureEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Last end minus first start; zero for an empty sequence.
    pub fn duration(&self) -> f64 {
        match (self.events.first(), self.events.last()) {
            (Some(first), Some(last)) => last.end - first.start,
            _ => 0.0,
        }
    }

    /// Events of dominant classes only, as `(class, start, end)`.
    pub fn dominant_events(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.events
            .iter()
            .filter_map(|e| e.gesture.class().map(|c| (c, e.start, e.end)))
    }

    /// Code sequence of dominant events.
    pub fn codes(&self) -> Vec<&str> {
        self.dominant_events()
            .map(|(c, _, _)| self.alphabet.code(c))
            .collect()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", HEADER.join(","))?;
        for ev in &self.events {
            let code = match ev.gesture {
                Gesture::Class(i) => self.alphabet.code(i),
                Gesture::Excluded => EXCLUDED_CODE,
            };
            writeln!(w, "{code},{},{}", ev.start, ev.end)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Reads a gesture file; the case id is the file stem.
pub fn parse_gesture_sequence(
    path: &Path,
    alphabet: &GestureAlphabet,
    options: ParseOptions,
) -> Result<GestureSequence> {
    let file = open(path)?;
    read_gesture_sequence(
        file,
        &path.display().to_string(),
        &case_id_from_path(path),
        alphabet,
        options,
    )
}

pub fn read_gesture_sequence<R: Read>(
    reader: R,
    context: &str,
    case_id: &str,
    alphabet: &GestureAlphabet,
    options: ParseOptions,
) -> Result<GestureSequence> {
    let records = read_records(reader, context)?;
    let mut events = Vec::with_capacity(records.len());
    for (idx, (line, rec)) in records.iter().enumerate() {
        if idx == 0 && rec.iter().eq(HEADER) {
            continue;
        }
        if rec.len() != 3 {
            return Err(Error::parse(
                context,
                *line,
                format!("expected 3 fields (gesture,start,end), found {}", rec.len()),
            ));
        }
        let code = &rec[0];
        let gesture = if code == EXCLUDED_CODE {
            Gesture::Excluded
        } else if let Some(i) = alphabet.index_of(code) {
            Gesture::Class(i)
        } else {
            match options.unknown {
                UnknownPolicy::Exclude => Gesture::Excluded,
                UnknownPolicy::Reject => {
                    return Err(Error::parse(
                        context,
                        *line,
                        format!("unknown gesture code {code:?}"),
                    ))
                }
            }
        };
        let start = parse_f64(&rec[1], context, *line, "start")?;
        let end = parse_f64(&rec[2], context, *line, "end")?;
        if end < start {
            return Err(Error::validation(format!(
                "{context}, line {line}: end {end} < start {start}"
            )));
        }
        if start < 0.0 {
            return Err(Error::validation(format!(
                "{context}, line {line}: negative start {start}"
            )));
        }
        events.push(GestureEvent::new(gesture, start, end));
    }
    if events.is_empty() {
        return Err(Error::NoEvents(context.to_string()));
    }
    GestureSequence::new(case_id, alphabet.clone(), events)
}

/// Frame label per sample time `t0 + i*dt`, `None` where no dominant event
/// covers the frame.
///
/// Events cover `[start, end)`. Where events overlap, the later-starting one
/// wins, so a frame exactly on a shared boundary belongs to the next event.
/// Frames under an excluded (`X`) event are unlabeled as well.
pub fn frame_labels_from_sequence(
    seq: &GestureSequence,
    dt: f64,
    t0: f64,
    n: usize,
) -> Vec<Option<usize>> {
    assert!(dt > 0.0, "dt must be positive");
    let time = |i: usize| t0 + i as f64 * dt;
    // first frame index whose time is >= t
    let first_at_or_after = |t: f64| -> usize {
        let guess = ((t - t0) / dt).ceil();
        let mut i = if guess <= 0.0 {
            0
        } else {
            (guess as usize).min(n)
        };
        while i > 0 && time(i - 1) >= t {
            i -= 1;
        }
        while i < n && time(i) < t {
            i += 1;
        }
        i
    };
    let mut labels = vec![None; n];
    // events are sorted by start, so painting in order lets later starts win
    for ev in seq.events() {
        let lo = first_at_or_after(ev.start);
        let hi = first_at_or_after(ev.end);
        for label in &mut labels[lo..hi.max(lo)] {
            *label = ev.gesture.class();
        }
    }
    labels
}
