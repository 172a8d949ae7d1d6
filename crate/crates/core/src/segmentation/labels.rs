use serde::Serialize;

use crate::error::{Error, Result};
use crate::gesture::FrameProbabilityStream;

/// A run of frames assigned to one gesture class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub start_frame: usize,
    /// Exclusive.
    pub end_frame: usize,
    /// Alphabet index.
    pub label: usize,
    /// Mean probability row over the segment's frames.
    pub mean_prob: Vec<f64>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end_frame - self.start_frame
    }

    pub fn is_empty(&self) -> bool {
        self.end_frame == self.start_frame
    }
}

fn check_breakpoints(ends: &[usize], n: usize) -> Result<()> {
    if ends.last() != Some(&n) {
        return Err(Error::validation(format!(
            "breakpoints must end at the stream length {n}"
        )));
    }
    let mut prev = 0;
    for &e in ends {
        if e <= prev {
            return Err(Error::validation(format!(
                "breakpoints must be strictly increasing and positive, got {ends:?}"
            )));
        }
        prev = e;
    }
    Ok(())
}

/// Labels each segment with `argmax_c weight_c * mean_prob_c` (ties go to the
/// earlier class in the alphabet) and merges neighbours that share a label.
pub fn label_segments(
    stream: &FrameProbabilityStream,
    breakpoints: &[usize],
    weights: &[f64],
) -> Result<Vec<Segment>> {
    let k = stream.k();
    if weights.len() != k {
        return Err(Error::validation(format!(
            "{} class weights for {k} classes",
            weights.len()
        )));
    }
    check_breakpoints(breakpoints, stream.len())?;

    let mut out: Vec<(usize, usize, usize, Vec<f64>)> = Vec::new();
    let mut start = 0;
    for &end in breakpoints {
        let mut sums = vec![0.0; k];
        for i in start..end {
            for (s, p) in sums.iter_mut().zip(stream.row(i)) {
                *s += p;
            }
        }
        let len = (end - start) as f64;
        let mut label = 0;
        let mut top = f64::NEG_INFINITY;
        for (c, (s, w)) in sums.iter().zip(weights).enumerate() {
            let score = w * s / len;
            if score > top {
                top = score;
                label = c;
            }
        }
        match out.last_mut() {
            Some(last) if last.2 == label => {
                last.1 = end;
                for (a, b) in last.3.iter_mut().zip(&sums) {
                    *a += b;
                }
            }
            _ => out.push((start, end, label, sums)),
        }
        start = end;
    }

    Ok(out
        .into_iter()
        .map(|(start_frame, end_frame, label, sums)| {
            let len = (end_frame - start_frame) as f64;
            Segment {
                start_frame,
                end_frame,
                label,
                mean_prob: sums.into_iter().map(|s| s / len).collect(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gesture::GestureAlphabet;

    fn stream(rows: Vec<Vec<f64>>) -> FrameProbabilityStream {
        let a = GestureAlphabet::parse_list("p,s").unwrap();
        FrameProbabilityStream::new("x", a, 0.0, 1.0, rows).unwrap()
    }

    #[test]
    fn argmax_of_mean() {
        let s = stream(vec![vec![0.6, 0.4]; 3]);
        let segs = label_segments(&s, &[3], &[1.0, 1.0]).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].label, 0);
    }

    #[test]
    fn weights_shift_the_label() {
        let s = stream(vec![vec![0.6, 0.4]; 3]);
        let segs = label_segments(&s, &[3], &[1.0, 2.0]).unwrap();
        assert_eq!(segs[0].label, 1);
    }

    #[test]
    fn ties_go_to_alphabet_order() {
        let s = stream(vec![vec![0.5, 0.5]; 2]);
        assert_eq!(label_segments(&s, &[2], &[1.0, 1.0]).unwrap()[0].label, 0);
    }

    #[test]
    fn equal_neighbours_merge() {
        let s = stream(vec![
            vec![0.9, 0.1],
            vec![0.9, 0.1],
            vec![0.7, 0.3],
            vec![0.1, 0.9],
        ]);
        let segs = label_segments(&s, &[2, 3, 4], &[1.0, 1.0]).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!((segs[0].start_frame, segs[0].end_frame, segs[0].label), (0, 3, 0));
        assert!((segs[0].mean_prob[0] - 2.5 / 3.0).abs() < 1e-12);
        assert_eq!((segs[1].start_frame, segs[1].end_frame, segs[1].label), (3, 4, 1));
    }

    #[test]
    fn bad_breakpoints() {
        let s = stream(vec![vec![0.5, 0.5]; 4]);
        assert!(label_segments(&s, &[2], &[1.0, 1.0]).is_err());
        assert!(label_segments(&s, &[2, 2, 4], &[1.0, 1.0]).is_err());
        assert!(label_segments(&s, &[0, 4], &[1.0, 1.0]).is_err());
        assert!(label_segments(&s, &[4], &[1.0]).is_err());
    }
}
