//! Frame probabilities to gesture sequences.
//!
//! A probability stream is cut into homogeneous runs by exact penalized
//! change-point detection under a Gaussian-kernel segment cost, and every run
//! is labeled with its dominant (optionally weighted) class.

mod cost;
mod labels;
mod pelt;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cost::{rbf_cost, rbf_kernel, resolve_gamma, Signal, MEDIAN_SUBSAMPLE};
pub use labels::{label_segments, Segment};
pub use pelt::optimal_partition;

use crate::error::{Error, Result};
use crate::gesture::{
    FrameProbabilityStream, GestureAlphabet, Gesture, GestureEvent, GestureSequence,
};

pub const DEFAULT_PENALTY: f64 = 0.5;
pub const DEFAULT_MIN_SEGMENT_FRAMES: usize = 2;

/// Kernel bandwidth selection.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Bandwidth {
    /// Inverse median pairwise squared distance, see [`resolve_gamma`].
    #[default]
    Median,
    Fixed(f64),
}

impl Bandwidth {
    pub fn resolve(self, signal: Signal<'_>) -> f64 {
        match self {
            Bandwidth::Median => resolve_gamma(signal),
            Bandwidth::Fixed(g) => g,
        }
    }
}

impl FromStr for Bandwidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "median" | "median-heuristic" => Ok(Bandwidth::Median),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|g| *g > 0.0 && g.is_finite())
                .map(Bandwidth::Fixed)
                .ok_or_else(|| {
                    Error::Config(format!("gamma must be \"median\" or a positive number, got {other:?}"))
                }),
        }
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bandwidth::Median => f.write_str("median"),
            Bandwidth::Fixed(g) => write!(f, "{g}"),
        }
    }
}

impl Serialize for Bandwidth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bandwidth::Median => s.serialize_str("median"),
            Bandwidth::Fixed(g) => s.serialize_f64(*g),
        }
    }
}

impl<'de> Deserialize<'de> for Bandwidth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(g) => Bandwidth::from_str(&g.to_string()),
            Raw::Str(s) => Bandwidth::from_str(&s),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationConfig {
    pub penalty: f64,
    pub gamma: Bandwidth,
    pub min_segment_frames: usize,
    /// Labeling weight per class code; missing codes weigh 1.
    pub class_weights: BTreeMap<String, f64>,
    pub prune: bool,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            penalty: DEFAULT_PENALTY,
            gamma: Bandwidth::Median,
            min_segment_frames: DEFAULT_MIN_SEGMENT_FRAMES,
            class_weights: BTreeMap::new(),
            prune: true,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.penalty >= 0.0 && self.penalty.is_finite()) {
            return Err(Error::Config(format!("penalty must be >= 0, got {}", self.penalty)));
        }
        if let Bandwidth::Fixed(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::Config(format!("gamma must be > 0, got {g}")));
            }
        }
        if self.min_segment_frames == 0 {
            return Err(Error::Config("min_segment_frames must be >= 1".into()));
        }
        if let Some((code, w)) = self.class_weights.iter().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Config(format!("weight for {code:?} must be > 0, got {w}")));
        }
        Ok(())
    }

    /// Weights in alphabet order; codes not in the alphabet are an error.
    pub fn weights_for(&self, alphabet: &GestureAlphabet) -> Result<Vec<f64>> {
        let mut weights = vec![1.0; alphabet.len()];
        for (code, &w) in &self.class_weights {
            let i = alphabet
                .index_of(code)
                .ok_or_else(|| Error::Config(format!("weight for unknown class {code:?}")))?;
            weights[i] = w;
        }
        Ok(weights)
    }
}

/// Segment ends (interior breakpoints then `n`) for a stream.
pub fn pelt_changepoints(
    stream: &FrameProbabilityStream,
    config: &SegmentationConfig,
) -> Result<Vec<usize>> {
    config.validate()?;
    let signal = Signal::from(stream);
    let gamma = config.gamma.resolve(signal);
    Ok(optimal_partition(
        signal,
        gamma,
        config.penalty,
        config.min_segment_frames,
        config.prune,
    ))
}

/// Labeled segments for a stream.
pub fn segment_stream(
    stream: &FrameProbabilityStream,
    config: &SegmentationConfig,
) -> Result<Vec<Segment>> {
    let weights = config.weights_for(stream.alphabet())?;
    let ends = pelt_changepoints(stream, config)?;
    label_segments(stream, &ends, &weights)
}

/// Converts a stream into a gesture sequence; frame `i` maps to time
/// `t0 + i * dt`.
pub fn aggregate(
    stream: &FrameProbabilityStream,
    config: &SegmentationConfig,
) -> Result<GestureSequence> {
    let segments = segment_stream(stream, config)?;
    let time = |frame: usize| stream.t0() + frame as f64 * stream.dt();
    let events = segments
        .iter()
        .map(|s| GestureEvent::new(Gesture::Class(s.label), time(s.start_frame), time(s.end_frame)))
        .collect();
    GestureSequence::new(stream.case_id(), stream.alphabet().clone(), events)
}

/// One point of a penalty sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub penalty: f64,
    pub n_events: usize,
    /// Aggregated over reference length, when a reference is given.
    pub length_ratio: Option<f64>,
}

/// Penalties `0, 0.05, ..., 1`.
pub fn default_penalty_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 * 0.05).collect()
}

/// Aggregates the stream at each penalty and reports the resulting sequence
/// length, optionally relative to a reference sequence.
pub fn penalty_sweep(
    stream: &FrameProbabilityStream,
    base: &SegmentationConfig,
    penalties: &[f64],
    reference: Option<&GestureSequence>,
) -> Result<Vec<SweepPoint>> {
    let reference_len = reference.map(|r| r.dominant_events().count());
    penalties
        .iter()
        .map(|&penalty| {
            let config = SegmentationConfig {
                penalty,
                ..base.clone()
            };
            let n_events = aggregate(stream, &config)?.len();
            Ok(SweepPoint {
                penalty,
                n_events,
                length_ratio: reference_len
                    .filter(|&r| r > 0)
                    .map(|r| n_events as f64 / r as f64),
            })
        })
        .collect()
}
