//! Seeded generators for ground-truth gesture sequences, rendered probability
//! streams and labeled cohorts.
//!
//! Sequences come from a first-order Markov chain over the alphabet with
//! log-normal event durations. Streams put a scaled one-hot logit on the true
//! class, add Gaussian logit noise and apply a softmax.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gesture::{
    frame_labels_from_sequence, FrameProbabilityStream, Gesture, GestureAlphabet, GestureEvent,
    GestureSequence, Outcome, OutcomeTable, DEFAULT_DT,
};

const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Stream used for rendering noise, kept apart from the sequence draws so the
/// sequence does not depend on rendering settings.
const RENDER_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transitions {
    /// Every class equally likely, repeats included.
    Uniform,
    /// Uniform over the other classes; consecutive events always differ.
    UniformNoRepeat,
    /// Row-stochastic `k x k` matrix.
    Matrix(Vec<Vec<f64>>),
}

impl Transitions {
    /// Dense matrix form for an alphabet of `k` classes.
    pub fn to_matrix(&self, k: usize) -> Result<Vec<Vec<f64>>> {
        match self {
            Self::Uniform => Ok(vec![vec![1.0 / k as f64; k]; k]),
            Self::UniformNoRepeat => {
                if k < 2 {
                    return Err(Error::Config("no-repeat transitions need two classes".into()));
                }
                let off = 1.0 / (k - 1) as f64;
                Ok((0..k)
                    .map(|i| (0..k).map(|j| if i == j { 0.0 } else { off }).collect())
                    .collect())
            }
            Self::Matrix(m) => {
                validate_matrix(m, k)?;
                Ok(m.clone())
            }
        }
    }
}

fn validate_matrix(m: &[Vec<f64>], k: usize) -> Result<()> {
    if m.len() != k {
        return Err(Error::Config(format!("transition matrix has {} rows, expected {k}", m.len())));
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != k {
            return Err(Error::Config(format!("transition row {i} has {} entries", row.len())));
        }
        if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Config(format!("transition row {i} has a negative or non-finite entry")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::Config(format!("transition row {i} sums to {sum}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// Comma-joined codes in file form.
    #[serde(with = "alphabet_serde")]
    pub alphabet: GestureAlphabet,
    pub n_events: usize,
    /// Mean event duration in seconds.
    pub mean_duration: f64,
    /// Log-space standard deviation of durations.
    pub duration_spread: f64,
    pub transitions: Transitions,
    pub dt: f64,
    pub noise_sigma: f64,
    pub temperature: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            alphabet: GestureAlphabet::default(),
            n_events: 270,
            mean_duration: 2.0,
            duration_spread: 0.35,
            transitions: Transitions::Uniform,
            dt: DEFAULT_DT,
            noise_sigma: 0.05,
            temperature: 0.25,
            seed: 0,
        }
    }
}

mod alphabet_serde {
    use super::GestureAlphabet;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(a: &GestureAlphabet, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&a.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<GestureAlphabet, D::Error> {
        let s = String::deserialize(d)?;
        GestureAlphabet::parse_list(&s).map_err(serde::de::Error::custom)
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_events == 0 {
            return Err(Error::Config("n_events must be positive".into()));
        }
        if !(self.mean_duration > 0.0 && self.mean_duration.is_finite()) {
            return Err(Error::Config("mean_duration must be positive".into()));
        }
        if !(self.duration_spread >= 0.0 && self.duration_spread.is_finite()) {
            return Err(Error::Config("duration_spread must be >= 0".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config("dt must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config("noise_sigma must be >= 0".into()));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Config("temperature must be positive".into()));
        }
        self.transitions.to_matrix(self.alphabet.len())?;
        Ok(())
    }

    fn sequence_rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn render_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(RENDER_STREAM);
        rng
    }
}

fn draw_index<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    // rounding left u just past the end; take the last positive weight
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

fn lognormal(mean: f64, spread: f64) -> Result<LogNormal<f64>> {
    LogNormal::new(mean.ln() - 0.5 * spread * spread, spread)
        .map_err(|e| Error::Config(format!("duration distribution: {e}")))
}

/// Draws a contiguous sequence starting at time 0.
pub fn generate_sequence(config: &SynthConfig) -> Result<GestureSequence> {
    config.validate()?;
    let k = config.alphabet.len();
    let matrix = config.transitions.to_matrix(k)?;
    let durations = vec![lognormal(config.mean_duration, config.duration_spread)?; k];
    sample_chain(config, &matrix, &durations, &mut config.sequence_rng(), "synthetic")
}

fn sample_chain(
    config: &SynthConfig,
    matrix: &[Vec<f64>],
    durations: &[LogNormal<f64>],
    rng: &mut ChaCha8Rng,
    case_id: &str,
) -> Result<GestureSequence> {
    let k = config.alphabet.len();
    let mut class = rng.random_range(0..k);
    let mut t = 0.0;
    let mut events = Vec::with_capacity(config.n_events);
    for i in 0..config.n_events {
        if i > 0 {
            class = draw_index(rng, &matrix[class]);
        }
        let d = durations[class].sample(rng);
        events.push(GestureEvent::new(Gesture::Class(class), t, t + d));
        t += d;
    }
    GestureSequence::new(case_id, config.alphabet.clone(), events)
}

/// Renders frame probabilities at `t = i * dt` for `i < ceil(span / dt)`.
/// Frames not covered by an event get zero base logits.
pub fn render_stream(seq: &GestureSequence, config: &SynthConfig) -> Result<FrameProbabilityStream> {
    config.validate()?;
    let k = config.alphabet.len();
    if seq.alphabet() != &config.alphabet {
        return Err(Error::validation("sequence and config alphabets differ"));
    }
    let end = seq.events().iter().map(|e| e.end).fold(0.0, f64::max);
    let n = ((end / config.dt).ceil() as usize).max(1);
    let labels = frame_labels_from_sequence(seq, config.dt, 0.0, n);
    let noise = Normal::new(0.0, config.noise_sigma)
        .map_err(|e| Error::Config(format!("noise distribution: {e}")))?;
    let mut rng = config.render_rng();
    let scale = 1.0 / config.temperature;
    let mut probs = Vec::with_capacity(n * k);
    let mut logits = vec![0.0; k];
    for label in &labels {
        for (c, l) in logits.iter_mut().enumerate() {
            let base = if Some(c) == *label { scale } else { 0.0 };
            *l = base + noise.sample(&mut rng);
        }
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = logits.iter().map(|l| (l - max).exp()).sum();
        probs.extend(logits.iter().map(|l| (l - max).exp() / total));
    }
    FrameProbabilityStream::from_flat(seq.case_id(), config.alphabet.clone(), 0.0, config.dt, probs)
}

/// How the good-outcome group departs from the base chain. Each knob is a
/// fraction in [0, 1]; all zero gives exchangeable groups.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutcomeModel {
    /// Share of the remaining mass moved onto the `p -> p` transition.
    pub peel_self_transition: f64,
    /// Fractional cut of every transition into `g`.
    pub coag_reduction: f64,
    /// Fractional lengthening of `p` durations.
    pub peel_duration: f64,
}

impl OutcomeModel {
    pub const NULL: Self = Self {
        peel_self_transition: 0.0,
        coag_reduction: 0.0,
        peel_duration: 0.0,
    };

    /// All three effects at the same strength.
    pub fn planted(effect: f64) -> Self {
        Self {
            peel_self_transition: effect,
            coag_reduction: effect,
            peel_duration: effect,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("peel_self_transition", self.peel_self_transition),
            ("coag_reduction", self.coag_reduction),
            ("peel_duration", self.peel_duration),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    fn apply(&self, base: &[Vec<f64>], alphabet: &GestureAlphabet) -> Vec<Vec<f64>> {
        let mut m = base.to_vec();
        if let Some(g) = alphabet.index_of("g") {
            for row in &mut m {
                let cut = row[g] * self.coag_reduction;
                let rest: f64 = row.iter().sum::<f64>() - row[g];
                if rest > 0.0 {
                    row[g] -= cut;
                    let others: Vec<usize> = (0..row.len()).filter(|&j| j != g).collect();
                    for j in others {
                        row[j] += cut * row[j] / rest;
                    }
                }
            }
        }
        if let Some(p) = alphabet.index_of("p") {
            let row = &mut m[p];
            let moved = (1.0 - row[p]) * self.peel_self_transition;
            let rest = 1.0 - row[p];
            if rest > 0.0 {
                for (j, v) in row.iter_mut().enumerate() {
                    if j != p {
                        *v -= moved * *v / rest;
                    }
                }
                row[p] += moved;
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct SynthCase {
    pub sequence: GestureSequence,
    pub outcome: Outcome,
    /// Seed the case was drawn with.
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Cohort {
    pub cases: Vec<SynthCase>,
    pub outcomes: OutcomeTable,
}

pub fn case_id(index: usize) -> String {
    format!("case{index:04}")
}

/// Draws one cohort case; case `i` uses seed `config.seed + i` and outcomes
/// alternate starting with poor.
pub fn generate_case(config: &SynthConfig, model: &OutcomeModel, index: usize) -> Result<SynthCase> {
    config.validate()?;
    model.validate()?;
    let k = config.alphabet.len();
    let outcome = if index % 2 == 0 { Outcome::Poor } else { Outcome::Good };
    let base = config.transitions.to_matrix(k)?;
    let dist = lognormal(config.mean_duration, config.duration_spread)?;
    let mut durations = vec![dist; k];
    let matrix = match outcome {
        Outcome::Poor => base,
        Outcome::Good => {
            if let Some(p) = config.alphabet.index_of("p") {
                durations[p] = lognormal(
                    config.mean_duration * (1.0 + model.peel_duration),
                    config.duration_spread,
                )?;
            }
            model.apply(&base, &config.alphabet)
        }
    };
    let seed = config.seed.wrapping_add(index as u64);
    let case_config = SynthConfig {
        seed,
        ..config.clone()
    };
    let sequence = sample_chain(
        &case_config,
        &matrix,
        &durations,
        &mut case_config.sequence_rng(),
        &case_id(index),
    )?;
    Ok(SynthCase {
        sequence,
        outcome,
        seed,
    })
}

/// Config for rendering a case produced by [`generate_case`].
pub fn case_render_config(config: &SynthConfig, case: &SynthCase) -> SynthConfig {
    SynthConfig {
        seed: case.seed,
        ..config.clone()
    }
}

pub fn generate_cohort(config: &SynthConfig, n_cases: usize, model: &OutcomeModel) -> Result<Cohort> {
    let cases = (0..n_cases)
        .map(|i| generate_case(config, model, i))
        .collect::<Result<Vec<_>>>()?;
    let outcomes = cases
        .iter()
        .map(|c| (c.sequence.case_id().to_string(), c.outcome))
        .collect();
    Ok(Cohort { cases, outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            n_events: 40,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn same_seed_same_sequence() {
        let a = generate_sequence(&small(5)).unwrap();
        let b = generate_sequence(&small(5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_sequence(&small(6)).unwrap());
    }

    #[test]
    fn events_are_contiguous() {
        let seq = generate_sequence(&small(1)).unwrap();
        assert_eq!(seq.len(), 40);
        assert_eq!(seq.events()[0].start, 0.0);
        for w in seq.events().windows(2) {
            assert_eq!(w[0].end, w[1].start);
            assert!(w[0].end > w[0].start);
        }
    }

    #[test]
    fn absorbing_chain_repeats() {
        let k = 10;
        let m = (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let cfg = SynthConfig {
            transitions: Transitions::Matrix(m),
            ..small(3)
        };
        let seq = generate_sequence(&cfg).unwrap();
        let first = seq.events()[0].gesture;
        assert!(seq.events().iter().all(|e| e.gesture == first));
    }

    #[test]
    fn no_repeat_chain() {
        let cfg = SynthConfig {
            transitions: Transitions::UniformNoRepeat,
            ..small(8)
        };
        let seq = generate_sequence(&cfg).unwrap();
        assert!(seq.events().windows(2).all(|w| w[0].gesture != w[1].gesture));
    }

    #[test]
    fn bad_matrix_rejected() {
        let cfg = SynthConfig {
            transitions: Transitions::Matrix(vec![vec![0.5, 0.4]; 2]),
            alphabet: GestureAlphabet::new(["a", "b"]).unwrap(),
            ..small(0)
        };
        assert!(generate_sequence(&cfg).is_err());
        let cfg = SynthConfig {
            transitions: Transitions::Matrix(vec![vec![0.5, 0.5]; 3]),
            ..cfg
        };
        assert!(generate_sequence(&cfg).is_err());
    }

    #[test]
    fn span_near_expected() {
        let seq = generate_sequence(&SynthConfig {
            seed: 2024,
            ..Default::default()
        })
        .unwrap();
        assert!((seq.duration() - 540.0).abs() < 0.15 * 540.0, "{}", seq.duration());
    }

    #[test]
    fn noise_free_argmax_matches_truth() {
        for temperature in [1.0, 0.25, 1e-3] {
            let cfg = SynthConfig {
                noise_sigma: 0.0,
                temperature,
                ..small(4)
            };
            let seq = generate_sequence(&cfg).unwrap();
            let stream = render_stream(&seq, &cfg).unwrap();
            let truth = frame_labels_from_sequence(&seq, cfg.dt, 0.0, stream.len());
            for (row, label) in stream.rows().zip(&truth) {
                let arg = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
                assert_eq!(Some(arg), *label);
                if temperature < 0.01 {
                    assert!(row[arg] > 1.0 - 1e-12);
                }
            }
        }
    }

    #[test]
    fn model_keeps_rows_stochastic() {
        let alphabet = GestureAlphabet::default();
        let base = Transitions::Uniform.to_matrix(10).unwrap();
        let m = OutcomeModel::planted(0.7).apply(&base, &alphabet);
        validate_matrix(&m, 10).unwrap();
        let p = alphabet.index_of("p").unwrap();
        let g = alphabet.index_of("g").unwrap();
        assert!(m[p][p] > base[p][p]);
        assert!(m[0][g] < base[0][g]);
        assert_eq!(OutcomeModel::NULL.apply(&base, &alphabet), base);
    }

    #[test]
    fn cohort_is_balanced_and_seeded_per_case() {
        let cfg = small(100);
        let cohort = generate_cohort(&cfg, 6, &OutcomeModel::planted(0.5)).unwrap();
        assert_eq!(cohort.outcomes.counts(), (3, 3));
        let again = generate_case(&cfg, &OutcomeModel::planted(0.5), 4).unwrap();
        assert_eq!(again.sequence, cohort.cases[4].sequence);
        assert_eq!(cohort.cases[4].seed, 104);
        let other = generate_cohort(&small(7), 6, &OutcomeModel::planted(0.5)).unwrap();
        assert_ne!(other.cases[0].sequence, cohort.cases[0].sequence);
    }

    #[test]
    fn config_round_trips_through_serde() {
        let cfg = SynthConfig {
            transitions: Transitions::UniformNoRepeat,
            ..small(9)
        };
        let json = serde_json::to_string(&cfg).unwrap();
        let back: SynthConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }
}
