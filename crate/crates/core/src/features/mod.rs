//! Engineered features of a gesture sequence.
//!
//! Ten families are computed over the dominant (non-`X`) events of a
//! sequence. With `k` classes the assembled vector has
//! `k^3 + 2k^2 + 17k + 17` entries:
//!
//! | family      | names                                   | count     |
//! |-------------|-----------------------------------------|-----------|
//! | frequency   | `freq_g`                                | k         |
//! | decay       | `decay_g`                               | k         |
//! | temporal    | `total_span`, `gesture_rate`, `time_since_last_g` | k + 2 |
//! | structure   | `unique_count`, `change_count`, `entropy` | 3       |
//! | 2-grams     | `2gram_a_b`                             | k^2       |
//! | 3-grams     | `3gram_a_b_c`                           | k^3       |
//! | transitions | `trans_a_b`                             | k^2       |
//! | dwell       | `dwell_<stat>`, `dwell_before_<stat>_g` | 7 + 7k    |
//! | duration    | `duration_<stat>`, `dur_<stat>_g`       | 5 + 5k    |
//! | run length  | `max_run_g`, `avg_run_g`                | 2k        |
//!
//! Dwell times are start-to-start intervals. Statistics on too few values use
//! the sentinels documented on [`Summary`]; `time_since_last_g` is -1 for an
//! absent class. No feature is ever NaN.

mod families;
mod moments;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use families::Family;
pub use moments::{summarize, Summary, DEGENERATE_SPREAD};

use crate::error::{Error, Result};
use crate::gesture::{GestureAlphabet, GestureSequence};
use families::Prepared;

pub const DEFAULT_DECAY_LAMBDA: f64 = 0.01;

/// `(name, value)` pairs in schema order.
pub type NamedValues = Vec<(String, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Per-second rate of the recency weighting in `decay_g`.
    pub decay_lambda: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            decay_lambda: DEFAULT_DECAY_LAMBDA,
        }
    }
}

/// Closed-form schema size for an alphabet of `k` classes.
pub fn schema_len(k: usize) -> usize {
    k.pow(3) + 2 * k.pow(2) + 17 * k + 17
}

/// Feature names for an alphabet and configuration.
#[derive(Debug, Clone)]
pub struct FeatureSchema {
    alphabet: GestureAlphabet,
    config: FeatureConfig,
    names: Arc<[String]>,
    index: HashMap<String, usize>,
}

impl FeatureSchema {
    pub fn new(alphabet: GestureAlphabet, config: FeatureConfig) -> Result<Self> {
        if !(config.decay_lambda >= 0.0 && config.decay_lambda.is_finite()) {
            return Err(Error::Config(format!(
                "decay_lambda must be >= 0, got {}",
                config.decay_lambda
            )));
        }
        let mut names = Vec::with_capacity(schema_len(alphabet.len()));
        for family in Family::SCHEMA {
            family.names(alphabet.codes(), &mut names);
        }
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        Ok(Self {
            alphabet,
            config,
            names: names.into(),
            index,
        })
    }

    pub fn alphabet(&self) -> &GestureAlphabet {
        &self.alphabet
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

impl Default for FeatureSchema {
    fn default() -> Self {
        Self::new(GestureAlphabet::default(), FeatureConfig::default())
            .expect("default schema is valid")
    }
}

/// Feature values for one case, aligned with its schema's names.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub case_id: String,
    names: Arc<[String]>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.names.iter().map(String::as_str).zip(self.values.iter().copied())
    }
}

fn family_values(seq: &GestureSequence, family: Family, decay_lambda: f64) -> Result<NamedValues> {
    let prepared = Prepared::new(seq);
    let mut names = Vec::new();
    family.names(seq.alphabet().codes(), &mut names);
    let mut values = Vec::with_capacity(names.len());
    family.compute(&prepared, decay_lambda, &mut values)?;
    debug_assert_eq!(names.len(), values.len());
    Ok(names.into_iter().zip(values).collect())
}

/// `freq_g = count(g) / m`.
pub fn frequency_features(seq: &GestureSequence) -> Result<NamedValues> {
    family_values(seq, Family::Frequency, 0.0)
}

/// Recency-weighted frequencies: each event of class g contributes
/// `exp(-lambda * (t_last - t_i))`, normalized over classes.
pub fn decay_features(seq: &GestureSequence, lambda: f64) -> Result<NamedValues> {
    family_values(seq, Family::Decay, lambda)
}

/// Total span, events per second, and time since each class last started.
pub fn temporal_features(seq: &GestureSequence) -> Result<NamedValues> {
    family_values(seq, Family::Temporal, 0.0)
}

/// Distinct classes, label changes and Shannon entropy (bits).
pub fn structure_features(seq: &GestureSequence) -> Result<NamedValues> {
    family_values(seq, Family::Structure, 0.0)
}

/// Normalized counts of contiguous label n-grams; all zero when the sequence
/// is shorter than `n`.
pub fn ngram_features(seq: &GestureSequence, n: usize) -> Result<NamedValues> {
    if n == 0 {
        return Err(Error::Config("n-gram order must be >= 1".into()));
    }
    family_values(seq, Family::NGram(n), 0.0)
}

/// Row-normalized first-order transition counts.
pub fn transition_features(seq: &GestureSequence) -> Result<NamedValues> {
    family_values(seq, Family::Transition, 0.0)
}

pub fn dwell_features(seq: &GestureSequence) -> Result<NamedValues> {
    family_values(seq, Family::Dwell, 0.0)
}

pub fn duration_features(seq: &GestureSequence) -> Result<NamedValues> {
    family_values(seq, Family::Duration, 0.0)
}

pub fn runlength_features(seq: &GestureSequence) -> Result<NamedValues> {
    family_values(seq, Family::RunLength, 0.0)
}

/// All families in schema order.
pub fn assemble_feature_vector(seq: &GestureSequence, schema: &FeatureSchema) -> Result<FeatureVector> {
    if seq.alphabet() != schema.alphabet() {
        return Err(Error::validation(format!(
            "{}: sequence alphabet {} differs from schema alphabet {}",
            seq.case_id(),
            seq.alphabet(),
            schema.alphabet()
        )));
    }
    let prepared = Prepared::new(seq);
    let mut values = Vec::with_capacity(schema.len());
    for family in Family::SCHEMA {
        family.compute(&prepared, schema.config.decay_lambda, &mut values)?;
    }
    debug_assert_eq!(values.len(), schema.len());
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::validation(format!(
            "{}: feature {} is not finite",
            seq.case_id(),
            schema.names[i]
        )));
    }
    Ok(FeatureVector {
        case_id: seq.case_id().to_string(),
        names: Arc::clone(&schema.names),
        values,
    })
}
