use crate::error::{Error, Result};
use crate::gesture::GestureSequence;

use super::moments::summarize;

/// Dominant events of a sequence, in start order.
pub(crate) struct Prepared<'a> {
    pub case_id: &'a str,
    pub k: usize,
    pub labels: Vec<usize>,
    pub starts: Vec<f64>,
    pub ends: Vec<f64>,
}

impl<'a> Prepared<'a> {
    pub fn new(seq: &'a GestureSequence) -> Self {
        let mut labels = Vec::with_capacity(seq.len());
        let mut starts = Vec::with_capacity(seq.len());
        let mut ends = Vec::with_capacity(seq.len());
        for (c, s, e) in seq.dominant_events() {
            labels.push(c);
            starts.push(s);
            ends.push(e);
        }
        Self {
            case_id: seq.case_id(),
            k: seq.alphabet().len(),
            labels,
            starts,
            ends,
        }
    }

    fn m(&self) -> usize {
        self.labels.len()
    }

    fn require_events(&self) -> Result<()> {
        if self.labels.is_empty() {
            Err(Error::NoEvents(self.case_id.to_string()))
        } else {
            Ok(())
        }
    }

    fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

const DWELL_STATS: [&str; 7] = ["mean", "std", "min", "max", "median", "skew", "kurt"];
const DURATION_STATS: [&str; 5] = ["mean", "std", "skew", "kurt", "sum"];

/// One feature family. [`Family::SCHEMA`] fixes the order of the families in
/// an assembled vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Frequency,
    Decay,
    Temporal,
    Structure,
    NGram(usize),
    Transition,
    Dwell,
    Duration,
    RunLength,
}

impl Family {
    pub const SCHEMA: [Family; 10] = [
        Family::Frequency,
        Family::Decay,
        Family::Temporal,
        Family::Structure,
        Family::NGram(2),
        Family::NGram(3),
        Family::Transition,
        Family::Dwell,
        Family::Duration,
        Family::RunLength,
    ];

    pub fn names(self, codes: &[String], out: &mut Vec<String>) {
        match self {
            Family::Frequency => out.extend(codes.iter().map(|g| format!("freq_{g}"))),
            Family::Decay => out.extend(codes.iter().map(|g| format!("decay_{g}"))),
            Family::Temporal => {
                out.push("total_span".into());
                out.push("gesture_rate".into());
                out.extend(codes.iter().map(|g| format!("time_since_last_{g}")));
            }
            Family::Structure => {
                out.extend(["unique_count", "change_count", "entropy"].map(String::from));
            }
            Family::NGram(n) => {
                let k = codes.len();
                for idx in 0..k.pow(n as u32) {
                    let mut name = format!("{n}gram");
                    for digit in ngram_digits(idx, k, n) {
                        name.push('_');
                        name.push_str(&codes[digit]);
                    }
                    out.push(name);
                }
            }
            Family::Transition => {
                for a in codes {
                    out.extend(codes.iter().map(|b| format!("trans_{a}_{b}")));
                }
            }
            Family::Dwell => {
                out.extend(DWELL_STATS.iter().map(|s| format!("dwell_{s}")));
                for g in codes {
                    out.extend(DWELL_STATS.iter().map(|s| format!("dwell_before_{s}_{g}")));
                }
            }
            Family::Duration => {
                out.extend(DURATION_STATS.iter().map(|s| format!("duration_{s}")));
                for g in codes {
                    out.extend(DURATION_STATS.iter().map(|s| format!("dur_{s}_{g}")));
                }
            }
            Family::RunLength => {
                out.extend(codes.iter().map(|g| format!("max_run_{g}")));
                out.extend(codes.iter().map(|g| format!("avg_run_{g}")));
            }
        }
    }

    pub fn len(self, k: usize) -> usize {
        match self {
            Family::Frequency | Family::Decay => k,
            Family::Temporal => 2 + k,
            Family::Structure => 3,
            Family::NGram(n) => k.pow(n as u32),
            Family::Transition => k * k,
            Family::Dwell => 7 + 7 * k,
            Family::Duration => 5 + 5 * k,
            Family::RunLength => 2 * k,
        }
    }

    pub(crate) fn compute(self, p: &Prepared<'_>, decay_lambda: f64, out: &mut Vec<f64>) -> Result<()> {
        match self {
            Family::Frequency => frequency(p, out),
            Family::Decay => decay(p, decay_lambda, out),
            Family::Temporal => temporal(p, out),
            Family::Structure => structure(p, out),
            Family::NGram(n) => {
                ngram(p, n, out);
                Ok(())
            }
            Family::Transition => {
                transition(p, out);
                Ok(())
            }
            Family::Dwell => {
                dwell(p, out);
                Ok(())
            }
            Family::Duration => duration(p, out),
            Family::RunLength => {
                run_length(p, out);
                Ok(())
            }
        }
    }
}

/// Base-k digits of an n-gram index, most significant first.
fn ngram_digits(mut idx: usize, k: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for d in digits.iter_mut().rev() {
        *d = idx % k;
        idx /= k;
    }
    digits
}

fn frequency(p: &Prepared<'_>, out: &mut Vec<f64>) -> Result<()> {
    p.require_events()?;
    let m = p.m() as f64;
    out.extend(p.counts().into_iter().map(|c| c as f64 / m));
    Ok(())
}

fn decay(p: &Prepared<'_>, lambda: f64, out: &mut Vec<f64>) -> Result<()> {
    p.require_events()?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("decay rate must be >= 0, got {lambda}")));
    }
    let now = p.starts[p.m() - 1];
    let mut raw = vec![0.0; p.k];
    for (&l, &t) in p.labels.iter().zip(&p.starts) {
        raw[l] += (-lambda * (now - t)).exp();
    }
    // the most recent event has weight 1, so the total is at least 1
    let total: f64 = raw.iter().sum();
    out.extend(raw.into_iter().map(|r| r / total));
    Ok(())
}

fn temporal(p: &Prepared<'_>, out: &mut Vec<f64>) -> Result<()> {
    p.require_events()?;
    let m = p.m();
    let span = p.ends[m - 1] - p.starts[0];
    out.push(span);
    out.push(if span > 0.0 { m as f64 / span } else { 0.0 });
    let now = p.starts[m - 1];
    let mut last = vec![None; p.k];
    for (&l, &t) in p.labels.iter().zip(&p.starts) {
        last[l] = Some(t);
    }
    out.extend(last.into_iter().map(|t| t.map_or(-1.0, |t| now - t)));
    Ok(())
}

fn structure(p: &Prepared<'_>, out: &mut Vec<f64>) -> Result<()> {
    p.require_events()?;
    let counts = p.counts();
    let m = p.m() as f64;
    let unique = counts.iter().filter(|&&c| c > 0).count();
    let changes = p.labels.windows(2).filter(|w| w[0] != w[1]).count();
    let entropy: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let f = c as f64 / m;
            -f * f.log2()
        })
        .sum();
    out.extend([unique as f64, changes as f64, entropy]);
    Ok(())
}

fn ngram(p: &Prepared<'_>, n: usize, out: &mut Vec<f64>) {
    let k = p.k;
    let base = out.len();
    out.resize(base + k.pow(n as u32), 0.0);
    let m = p.m();
    if n == 0 || m < n {
        return;
    }
    let windows = (m - n + 1) as f64;
    for w in p.labels.windows(n) {
        let idx = w.iter().fold(0, |acc, &l| acc * k + l);
        out[base + idx] += 1.0;
    }
    out[base..].iter_mut().for_each(|v| *v /= windows);
}

fn transition(p: &Prepared<'_>, out: &mut Vec<f64>) {
    let k = p.k;
    let mut counts = vec![0usize; k * k];
    for w in p.labels.windows(2) {
        counts[w[0] * k + w[1]] += 1;
    }
    for row in counts.chunks(k) {
        let total: usize = row.iter().sum();
        if total == 0 {
            out.extend(std::iter::repeat_n(0.0, k));
        } else {
            out.extend(row.iter().map(|&c| c as f64 / total as f64));
        }
    }
}

fn push_dwell_stats(xs: &[f64], out: &mut Vec<f64>) {
    let s = summarize(xs);
    out.extend([s.mean, s.std, s.min, s.max, s.median, s.skew, s.kurt]);
}

fn push_duration_stats(xs: &[f64], out: &mut Vec<f64>) {
    let s = summarize(xs);
    out.extend([s.mean, s.std, s.skew, s.kurt, s.sum]);
}

fn dwell(p: &Prepared<'_>, out: &mut Vec<f64>) {
    let dwells: Vec<f64> = p.starts.windows(2).map(|w| w[1] - w[0]).collect();
    push_dwell_stats(&dwells, out);
    let mut before = vec![Vec::new(); p.k];
    // dwell i is the gap preceding event i+1
    for (d, &l) in dwells.iter().zip(&p.labels[1.min(p.m())..]) {
        before[l].push(*d);
    }
    for xs in &before {
        push_dwell_stats(xs, out);
    }
}

fn duration(p: &Prepared<'_>, out: &mut Vec<f64>) -> Result<()> {
    p.require_events()?;
    let durations: Vec<f64> = p.starts.iter().zip(&p.ends).map(|(s, e)| e - s).collect();
    push_duration_stats(&durations, out);
    let mut per_class = vec![Vec::new(); p.k];
    for (&d, &l) in durations.iter().zip(&p.labels) {
        per_class[l].push(d);
    }
    for xs in &per_class {
        push_duration_stats(xs, out);
    }
    Ok(())
}

fn run_length(p: &Prepared<'_>, out: &mut Vec<f64>) {
    let mut max_run = vec![0usize; p.k];
    let mut run_total = vec![0usize; p.k];
    let mut run_count = vec![0usize; p.k];
    let mut i = 0;
    while i < p.m() {
        let l = p.labels[i];
        let mut j = i + 1;
        while j < p.m() && p.labels[j] == l {
            j += 1;
        }
        let len = j - i;
        max_run[l] = max_run[l].max(len);
        run_total[l] += len;
        run_count[l] += 1;
        i = j;
    }
    out.extend(max_run.iter().map(|&r| r as f64));
    out.extend(run_total.iter().zip(&run_count).map(|(&t, &c)| {
        if c == 0 {
            0.0
        } else {
            t as f64 / c as f64
        }
    }));
}
