use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{case_id_from_path, open, parse_f64, read_records, validate_case_id, GestureAlphabet};

/// Sampling interval used when a file holds a single frame and no spacing can
/// be inferred (6 frames per second).
pub const DEFAULT_DT: f64 = 0.1667;

/// Rows must sum to 1 within this tolerance.
const SUM_TOLERANCE: f64 = 1e-6;
/// Rows whose sum is off by at most this much are rescaled on read.
const RENORMALIZE_WINDOW: f64 = 1e-3;
/// Allowed deviation of a timestamp from the uniform grid, in units of dt.
const GRID_TOLERANCE: f64 = 0.01;

/// Per-frame class probabilities for one video.
///
/// Stored row-major: frame `i` occupies `probs[i*k..(i+1)*k]`, columns in
/// alphabet order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameProbabilityStream {
    case_id: String,
    alphabet: GestureAlphabet,
    t0: f64,
    dt: f64,
    times: Vec<f64>,
    probs: Vec<f64>,
}

impl FrameProbabilityStream {
    pub fn new(
        case_id: impl Into<String>,
        alphabet: GestureAlphabet,
        t0: f64,
        dt: f64,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = alphabet.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != k) {
            return Err(Error::validation(format!(
                "row {bad} has {} probabilities, alphabet has {k}",
                rows[bad].len()
            )));
        }
        let probs = rows.into_iter().flatten().collect();
        Self::from_flat(case_id, alphabet, t0, dt, probs)
    }

    /// Builds a stream from row-major probabilities.
    pub fn from_flat(
        case_id: impl Into<String>,
        alphabet: GestureAlphabet,
        t0: f64,
        dt: f64,
        probs: Vec<f64>,
    ) -> Result<Self> {
        let k = alphabet.len();
        if probs.len() % k != 0 {
            return Err(Error::validation("probability buffer is not a whole number of rows"));
        }
        let n = probs.len() / k;
        let times = (0..n).map(|i| t0 + i as f64 * dt).collect();
        Self::from_parts(case_id.into(), alphabet, t0, dt, times, probs)
    }

    fn from_parts(
        case_id: String,
        alphabet: GestureAlphabet,
        t0: f64,
        dt: f64,
        times: Vec<f64>,
        probs: Vec<f64>,
    ) -> Result<Self> {
        validate_case_id(&case_id)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::validation(format!("dt must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::validation("non-finite t0"));
        }
        if probs.is_empty() {
            return Err(Error::validation("probability stream has no frames"));
        }
        let k = alphabet.len();
        for (i, row) in probs.chunks(k).enumerate() {
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::validation(format!(
                    "frame {i}: probability {p} outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::validation(format!("frame {i}: row sums to {sum}")));
            }
        }
        Ok(Self {
            case_id,
            alphabet,
            t0,
            dt,
            times,
            probs,
        })
    }

    pub fn case_id(&self) -> &str {
        &self.case_id
    }

    pub fn alphabet(&self) -> &GestureAlphabet {
        &self.alphabet
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of frames.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn k(&self) -> usize {
        self.alphabet.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.k();
        &self.probs[i * k..(i + 1) * k]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.probs.chunks(self.k())
    }

    /// Row-major probabilities, `len() * k()` values.
    pub fn as_flat(&self) -> &[f64] {
        &self.probs
    }

    /// Column of class `c` across all frames.
    pub fn column(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[c])
    }

    /// Timestamp of frame `i` as stored (file value, or `t0 + i*dt`).
    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t")?;
        for code in self.alphabet.codes() {
            write!(w, ",{code}")?;
        }
        writeln!(w)?;
        for (t, row) in self.times.iter().zip(self.rows()) {
            write!(w, "{t}")?;
            for p in row {
                write!(w, ",{p}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Reads a probability file; the case id is the file stem.
pub fn parse_probability_stream(
    path: &Path,
    alphabet: &GestureAlphabet,
) -> Result<FrameProbabilityStream> {
    let file = open(path)?;
    read_probability_stream(
        file,
        &path.display().to_string(),
        &case_id_from_path(path),
        alphabet,
    )
}

/// Reads `t,<codes...>` rows.
///
/// The header must name exactly the alphabet's classes, in any order; values
/// are stored in alphabet order. A row whose sum is within 1e-3 of one is
/// rescaled, anything further off is rejected. The sampling interval is
/// inferred from the first and last timestamps and every timestamp must lie
/// on that grid.
pub fn read_probability_stream<R: Read>(
    reader: R,
    context: &str,
    case_id: &str,
    alphabet: &GestureAlphabet,
) -> Result<FrameProbabilityStream> {
    let records = read_records(reader, context)?;
    let Some(((header_line, header), body)) = records.split_first() else {
        return Err(Error::parse(context, 1, "missing header"));
    };
    let k = alphabet.len();
    if header.len() != k + 1 || &header[0] != "t" {
        return Err(Error::parse(
            context,
            *header_line,
            format!("header must be t followed by the {k} alphabet codes"),
        ));
    }
    // file column j+1 -> alphabet index
    let mut column_to_class = Vec::with_capacity(k);
    for code in header.iter().skip(1) {
        let idx = alphabet.index_of(code).ok_or_else(|| {
            Error::parse(context, *header_line, format!("unknown class column {code:?}"))
        })?;
        if column_to_class.contains(&idx) {
            return Err(Error::parse(
                context,
                *header_line,
                format!("duplicate class column {code:?}"),
            ));
        }
        column_to_class.push(idx);
    }

    let mut times = Vec::with_capacity(body.len());
    let mut probs = vec![0.0; body.len() * k];
    for (i, (line, rec)) in body.iter().enumerate() {
        if rec.len() != k + 1 {
            return Err(Error::parse(
                context,
                *line,
                format!("expected {} fields, found {}", k + 1, rec.len()),
            ));
        }
        times.push(parse_f64(&rec[0], context, *line, "t")?);
        let row = &mut probs[i * k..(i + 1) * k];
        for (j, field) in rec.iter().skip(1).enumerate() {
            let p = parse_f64(field, context, *line, "probability")?;
            if p < 0.0 {
                return Err(Error::validation(format!(
                    "{context}, line {line}: negative probability {p}"
                )));
            }
            row[column_to_class[j]] = p;
        }
        let sum: f64 = row.iter().sum();
        let off = (sum - 1.0).abs();
        if off > RENORMALIZE_WINDOW {
            return Err(Error::validation(format!(
                "{context}, line {line}: row sums to {sum}"
            )));
        }
        if off > SUM_TOLERANCE {
            row.iter_mut().for_each(|p| *p /= sum);
        }
    }
    if times.is_empty() {
        return Err(Error::validation(format!("{context}: no frames")));
    }

    let n = times.len();
    let t0 = times[0];
    let dt = if n >= 2 {
        (times[n - 1] - t0) / (n - 1) as f64
    } else {
        DEFAULT_DT
    };
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::validation(format!(
            "{context}: timestamps must increase"
        )));
    }
    for (i, &t) in times.iter().enumerate() {
        if (t - (t0 + i as f64 * dt)).abs() > GRID_TOLERANCE * dt {
            return Err(Error::validation(format!(
                "{context}: frame {i} at t={t} is off the uniform {dt} s grid"
            )));
        }
    }
    FrameProbabilityStream::from_parts(case_id.to_string(), alphabet.clone(), t0, dt, times, probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha() -> GestureAlphabet {
        GestureAlphabet::default()
    }

    fn read(text: &str) -> Result<FrameProbabilityStream> {
        read_probability_stream(text.as_bytes(), "test", "case", &alpha())
    }

    const HEADER: &str = "t,c,h,k,m,p,r,s,a,g,e\n";

    #[test]
    fn uniform_rows() {
        let text = format!(
            "{HEADER}0,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1\n0.1667,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1\n"
        );
        let s = read(&text).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.dt() - 0.1667).abs() < 1e-12);
    }

    #[test]
    fn slightly_off_row_is_renormalized() {
        let text = format!("{HEADER}0,0.1005,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1\n");
        let s = read(&text).unwrap();
        let sum: f64 = s.row(0).iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert_eq!(s.dt(), DEFAULT_DT);
    }

    #[test]
    fn far_off_row_is_rejected() {
        let text = format!("{HEADER}0,0.2,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1\n");
        assert!(read(&text).is_err());
    }

    #[test]
    fn negative_entry_is_rejected() {
        let text = format!("{HEADER}0,-0.01,0.11,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1\n");
        let err = read(&text).unwrap_err();
        assert!(err.to_string().contains("negative"), "{err}");
    }

    #[test]
    fn columns_are_stored_in_alphabet_order() {
        let text = "t,e,g,a,s,r,p,m,k,h,c\n0,1,0,0,0,0,0,0,0,0,0\n";
        let s = read(text).unwrap();
        assert_eq!(s.row(0)[alpha().index_of("e").unwrap()], 1.0);
        assert!(s.to_csv_string().starts_with(HEADER));
    }

    #[test]
    fn header_must_match_alphabet() {
        assert!(read("t,c,h\n0,0.5,0.5\n").is_err());
        assert!(read("t,c,h,k,m,p,r,s,a,g,z\n").is_err());
        assert!(read("t,c,c,k,m,p,r,s,a,g,e\n").is_err());
    }

    #[test]
    fn irregular_timestamps_are_rejected() {
        let row = "0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1";
        let text = format!("{HEADER}0,{row}\n0.5,{row}\n0.6,{row}\n");
        assert!(read(&text).is_err());
    }

    #[test]
    fn constructor_validates() {
        let a = GestureAlphabet::parse_list("p,s").unwrap();
        assert!(FrameProbabilityStream::new("x", a.clone(), 0.0, 0.1, vec![]).is_err());
        assert!(FrameProbabilityStream::new("x", a.clone(), 0.0, 0.0, vec![vec![0.5, 0.5]]).is_err());
        assert!(FrameProbabilityStream::new("x", a.clone(), 0.0, 0.1, vec![vec![0.6, 0.5]]).is_err());
        assert!(FrameProbabilityStream::new("x", a, 0.0, 0.1, vec![vec![0.5]]).is_err());
    }
}
