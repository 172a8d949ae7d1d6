//! ROC AUC at frame and video level, plus sequence comparison helpers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gesture::{frame_labels_from_sequence, FrameProbabilityStream, GestureSequence};

/// A class needs at least this many positive and negative frames to be
/// evaluated; otherwise it is reported absent.
pub const MIN_FRAMES_PER_POLARITY: usize = 2;

/// Area under the ROC curve as the Mann-Whitney statistic: the fraction of
/// (positive, negative) pairs ranked correctly, ties counting one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::validation(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::validation("NaN score"));
    }
    let n_pos = labels.iter().filter(|&&l| l).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuc(format!(
            "{n_pos} positives and {n_neg} negatives"
        )));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the Mann-Whitney U, kept integral
    let mut twice_u: u128 = 0;
    let mut neg_below: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let score = scores[order[i]];
        let (mut pos, mut neg) = (0u64, 0u64);
        while i < order.len() && scores[order[i]] == score {
            if labels[order[i]] {
                pos += 1;
            } else {
                neg += 1;
            }
            i += 1;
        }
        twice_u += pos as u128 * (2 * neg_below + neg) as u128;
        neg_below += neg;
    }
    Ok((twice_u as f64 / 2.0) / (n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassAuc {
    pub code: String,
    pub present: bool,
    /// `None` when the class is absent.
    pub auc: Option<f64>,
    pub positive_frames: usize,
    pub negative_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AucReport {
    pub case_id: String,
    pub per_class: Vec<ClassAuc>,
    /// Mean over present classes; the video-level AUC.
    pub macro_auc: Option<f64>,
    pub n_frames_evaluated: usize,
}

impl AucReport {
    pub fn present(&self) -> impl Iterator<Item = &ClassAuc> + '_ {
        self.per_class.iter().filter(|c| c.present)
    }
}

/// One-vs-rest AUC per class over the frames the ground truth labels.
///
/// Frame `i` at `t0 + i*dt` takes the truth label of the event covering it;
/// uncovered frames are skipped. A class with fewer than
/// [`MIN_FRAMES_PER_POLARITY`] positive or negative frames is absent.
pub fn frame_level_auc(stream: &FrameProbabilityStream, truth: &GestureSequence) -> Result<AucReport> {
    if stream.alphabet() != truth.alphabet() {
        return Err(Error::validation("stream and ground truth use different alphabets"));
    }
    let labels = frame_labels_from_sequence(truth, stream.dt(), stream.t0(), stream.len());
    let frames: Vec<(usize, usize)> = labels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.map(|c| (i, c)))
        .collect();
    if frames.is_empty() {
        return Err(Error::validation(format!(
            "{}: no frame is covered by a ground-truth gesture",
            stream.case_id()
        )));
    }

    let mut per_class = Vec::with_capacity(stream.k());
    for (c, code) in stream.alphabet().codes().iter().enumerate() {
        let is_pos: Vec<bool> = frames.iter().map(|&(_, l)| l == c).collect();
        let positive_frames = is_pos.iter().filter(|&&p| p).count();
        let negative_frames = is_pos.len() - positive_frames;
        let present = positive_frames >= MIN_FRAMES_PER_POLARITY
            && negative_frames >= MIN_FRAMES_PER_POLARITY;
        let auc = if present {
            let scores: Vec<f64> = frames.iter().map(|&(i, _)| stream.row(i)[c]).collect();
            Some(roc_auc(&scores, &is_pos)?)
        } else {
            None
        };
        per_class.push(ClassAuc {
            code: code.clone(),
            present,
            auc,
            positive_frames,
            negative_frames,
        });
    }
    let mut report = AucReport {
        case_id: stream.case_id().to_string(),
        per_class,
        macro_auc: None,
        n_frames_evaluated: frames.len(),
    };
    report.macro_auc = video_level_auc(&report).ok();
    Ok(report)
}

/// Mean AUC over the classes present in the ground truth.
pub fn video_level_auc(report: &AucReport) -> Result<f64> {
    let aucs: Vec<f64> = report.present().filter_map(|c| c.auc).collect();
    if aucs.is_empty() {
        return Err(Error::UndefinedAuc(format!(
            "{}: no class present in the ground truth",
            report.case_id
        )));
    }
    Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
}

/// Levenshtein distance between two label sequences.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Frame indices where a new dominant event begins (every event but the
/// first), i.e. the first frame at or after each start.
pub fn boundary_frames(seq: &GestureSequence, t0: f64, dt: f64) -> Vec<usize> {
    seq.dominant_events()
        .skip(1)
        .map(|(_, start, _)| ((start - t0) / dt - 1e-9).ceil().max(0.0) as usize)
        .collect()
}

/// Fraction of reference boundaries with a detected boundary within
/// `tolerance` frames. An empty reference has recall 1.
pub fn boundary_recall(reference: &[usize], detected: &[usize], tolerance: usize) -> f64 {
    if reference.is_empty() {
        return 1.0;
    }
    let hits = reference
        .iter()
        .filter(|&&r| detected.iter().any(|&d| d.abs_diff(r) <= tolerance))
        .count();
    hits as f64 / reference.len() as f64
}
