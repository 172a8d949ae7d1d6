//! Run configuration: defaults, overlaid by a config file, overlaid by flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use gestureflow::cv::CvConfig;
use gestureflow::features::FeatureConfig;
use gestureflow::gesture::GestureAlphabet;
use gestureflow::segmentation::SegmentationConfig;
use gestureflow::stats::TTestKind;
use gestureflow::synthetic::{OutcomeModel, SynthConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub top_k: usize,
    pub test: TTestKind,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            top_k: 50,
            test: TTestKind::Student,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortConfig {
    pub n_cases: usize,
    /// Also write rendered probability streams.
    pub render: bool,
    pub outcome: OutcomeModel,
}

impl Default for CohortConfig {
    fn default() -> Self {
        Self {
            n_cases: 20,
            render: true,
            outcome: OutcomeModel::NULL,
        }
    }
}

/// Everything a run can be configured with. The top-level `seed` and
/// `alphabet` are the only sources of randomness and class codes; they are
/// copied into the synthetic and cross-validation sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    /// Worker threads for multi-case inputs; all cores when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    pub alphabet: String,
    pub segmentation: SegmentationConfig,
    pub features: FeatureConfig,
    pub stats: StatsConfig,
    pub cv: CvConfig,
    pub synth: SynthConfig,
    pub cohort: CohortConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            jobs: None,
            alphabet: GestureAlphabet::default().to_string(),
            segmentation: SegmentationConfig::default(),
            features: FeatureConfig::default(),
            stats: StatsConfig::default(),
            cv: CvConfig::default(),
            synth: SynthConfig::default(),
            cohort: CohortConfig::default(),
        }
    }
}

impl Config {
    /// Reads TOML, or JSON when the extension is `.json`. A run manifest is
    /// accepted too; its `config` member is used.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("{}: cannot read config", path.display()))?;
        let config = if path.extension().is_some_and(|e| e == "json") {
            let mut value: serde_json::Value =
                serde_json::from_str(&text).with_context(|| format!("{}: invalid JSON", path.display()))?;
            if let Some(inner) = value.get_mut("config") {
                value = inner.take();
            }
            serde_json::from_value(value).with_context(|| format!("{}: invalid config", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("{}: invalid config", path.display()))?
        };
        Ok(config)
    }

    pub fn alphabet(&self) -> Result<GestureAlphabet> {
        Ok(GestureAlphabet::parse_list(&self.alphabet)?)
    }

    /// Propagates shared settings and validates every section.
    pub fn finalize(mut self) -> Result<Self> {
        let alphabet = self.alphabet()?;
        self.alphabet = alphabet.to_string();
        self.synth.alphabet = alphabet;
        self.synth.seed = self.seed;
        self.cv.seed = self.seed;
        if self.jobs == Some(0) {
            bail!("jobs must be at least 1");
        }
        self.segmentation.validate()?;
        self.cv.validate()?;
        self.synth.validate()?;
        if self.stats.top_k == 0 {
            bail!("top_k must be at least 1");
        }
        if !(self.features.decay_lambda >= 0.0 && self.features.decay_lambda.is_finite()) {
            bail!("decay_lambda must be >= 0");
        }
        Ok(self)
    }

    pub fn jobs(&self) -> usize {
        self.jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

/// `code,weight` rows, header optional.
pub fn read_weights(path: &Path) -> Result<std::collections::BTreeMap<String, f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))?;
    let mut out = std::collections::BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.replace(' ', "") == "code,weight") {
            continue;
        }
        let Some((code, weight)) = line.split_once(',') else {
            bail!("{}, line {}: expected code,weight", path.display(), i + 1);
        };
        let weight: f64 = weight
            .trim()
            .parse()
            .with_context(|| format!("{}, line {}: bad weight", path.display(), i + 1))?;
        out.insert(code.trim().to_string(), weight);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_sections_overlay_defaults() {
        let c: Config = toml::from_str(
            "seed = 9\n[segmentation]\npenalty = 0.25\ngamma = 2.0\n[cohort.outcome]\ncoag_reduction = 0.5\n",
        )
        .unwrap();
        let c = c.finalize().unwrap();
        assert_eq!(c.segmentation.penalty, 0.25);
        assert_eq!(c.segmentation.min_segment_frames, 2);
        assert_eq!(c.synth.seed, 9);
        assert_eq!(c.cv.seed, 9);
        assert_eq!(c.cohort.outcome.coag_reduction, 0.5);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("sed = 1\n").is_err());
        assert!(toml::from_str::<Config>("[segmentation]\npenalt = 1\n").is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = Config { seed: 3, ..Default::default() }.finalize().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: Config = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
