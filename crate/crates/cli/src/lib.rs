//! `gestureflow` command-line interface.
//!
//! Every subcommand resolves its settings as flags > `--config` file >
//! built-in defaults, writes outputs atomically, and leaves a JSON run
//! manifest (resolved config, input digests, outputs, wall time) beside them.

mod commands;
pub mod config;
mod io;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gestureflow::cv::CiMethod;
use gestureflow::segmentation::Bandwidth;

pub use io::OUT_DIR_ENV;

use config::Config;

const PRECEDENCE: &str = "Settings resolve as: command-line flags, then the --config file \
(TOML, or a JSON run manifest), then built-in defaults. Outputs without an explicit \
path go to $GESTUREFLOW_OUT_DIR, or the working directory when it is unset.";

#[derive(Debug, Parser)]
#[command(name = "gestureflow", version, about = "Surgical gesture sequence analytics", after_help = PRECEDENCE)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Aggregate frame probabilities into gesture files
    #[command(after_help = PRECEDENCE)]
    Segment(SegmentArgs),
    /// Build a feature matrix from gesture files
    #[command(after_help = PRECEDENCE)]
    Features(FeaturesArgs),
    /// Frame- and video-level AUC of a probability stream against ground truth
    #[command(after_help = PRECEDENCE)]
    Evaluate(EvaluateArgs),
    /// Rank features by outcome association and compare two sources
    #[command(after_help = PRECEDENCE)]
    Stats(StatsArgs),
    /// Cross-validated outcome prediction
    #[command(after_help = PRECEDENCE)]
    Predict(PredictArgs),
    /// Generate a synthetic cohort
    #[command(after_help = PRECEDENCE)]
    Synth(SynthArgs),
    /// Probabilities to gesture sequences to features in one pass
    #[command(after_help = PRECEDENCE)]
    Pipeline(PipelineArgs),
    /// Sequence length across a grid of penalties
    #[command(after_help = PRECEDENCE)]
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config file or JSON run manifest
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for every random draw in the run
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for multi-case inputs (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Comma-separated class codes
    #[arg(long, value_name = "CODES")]
    alphabet: Option<String>,
}

#[derive(Debug, Args)]
struct SegmentationFlags {
    /// Cost added per change point
    #[arg(long)]
    penalty: Option<f64>,
    /// Kernel bandwidth: "median" or a positive number
    #[arg(long)]
    gamma: Option<Bandwidth>,
    /// Shortest allowed segment in frames
    #[arg(long)]
    min_segment_frames: Option<usize>,
    /// CSV of code,weight used when labeling segments
    #[arg(long, value_name = "FILE")]
    weights: Option<PathBuf>,
    /// Disable candidate pruning (plain O(n^2) search)
    #[arg(long)]
    no_prune: bool,
}

#[derive(Debug, Args)]
struct FeatureFlags {
    /// Per-second rate of the recency-weighted counts
    #[arg(long)]
    decay_lambda: Option<f64>,
    /// Feature schema; only "default" exists
    #[arg(long, default_value = "default")]
    schema: String,
    /// Treat unknown gesture codes as excluded instead of failing
    #[arg(long)]
    exclude_unknown: bool,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    seg: SegmentationFlags,
    /// Probability file or directory of them
    #[arg(long, value_name = "PATH")]
    probs: PathBuf,
    /// Output file (single input) or directory (directory input)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FeaturesArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    feat: FeatureFlags,
    /// Gesture file or directory of them
    #[arg(long, value_name = "PATH")]
    gestures: PathBuf,
    /// Feature matrix CSV
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_name = "FILE")]
    probs: PathBuf,
    /// Ground-truth gesture file
    #[arg(long, value_name = "FILE")]
    gestures: PathBuf,
    /// JSON report
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long)]
    exclude_unknown: bool,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_name = "FILE")]
    matrix_a: PathBuf,
    /// Second source; without it only the ranking of matrix A is written
    #[arg(long, value_name = "FILE")]
    matrix_b: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    outcomes: PathBuf,
    #[arg(long)]
    top_k: Option<usize>,
    /// Welch's unequal-variance test instead of Student's
    #[arg(long)]
    welch: bool,
    /// TSV report; a JSON summary is written beside it
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_name = "FILE")]
    matrix: PathBuf,
    #[arg(long, value_name = "FILE")]
    outcomes: PathBuf,
    /// Number of folds
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    no_standardize: bool,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Interval method
    #[arg(long, value_enum)]
    ci: Option<CiArg>,
    /// JSON report
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum CiArg {
    Normal,
    Bootstrap,
}

impl From<CiArg> for CiMethod {
    fn from(c: CiArg) -> Self {
        match c {
            CiArg::Normal => CiMethod::Normal,
            CiArg::Bootstrap => CiMethod::Bootstrap,
        }
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n_cases: Option<usize>,
    #[arg(long)]
    n_events: Option<usize>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
    /// Strength in [0, 1] of all planted outcome effects
    #[arg(long)]
    effect: Option<f64>,
    /// Skip writing probability streams
    #[arg(long)]
    no_render: bool,
    /// Receives gestures/, probs/ and outcomes.csv
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    seg: SegmentationFlags,
    #[command(flatten)]
    feat: FeatureFlags,
    /// Probability file or directory of them
    #[arg(long, value_name = "PATH")]
    probs: PathBuf,
    /// Feature matrix CSV
    #[arg(long, value_name = "FILE")]
    out_features: Option<PathBuf>,
    /// Also write the aggregated gesture files here
    #[arg(long, value_name = "DIR")]
    out_gestures: Option<PathBuf>,
    /// Per-case segmentation summary (JSON)
    #[arg(long, value_name = "FILE")]
    out_report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    seg: SegmentationFlags,
    #[arg(long, value_name = "FILE")]
    probs: PathBuf,
    /// Reference gesture file for length ratios
    #[arg(long, value_name = "FILE")]
    gestures: Option<PathBuf>,
    /// Comma-separated penalties (default 0 to 1 in steps of 0.05)
    #[arg(long, value_delimiter = ',')]
    penalties: Option<Vec<f64>>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self, overlay: impl FnOnce(&mut Config) -> anyhow::Result<()>) -> anyhow::Result<Config> {
        let mut config = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(jobs) = self.jobs {
            config.jobs = Some(jobs);
        }
        if let Some(alphabet) = &self.alphabet {
            config.alphabet.clone_from(alphabet);
        }
        overlay(&mut config)?;
        config.finalize()
    }
}

impl SegmentationFlags {
    fn apply(&self, config: &mut Config) -> anyhow::Result<()> {
        let seg = &mut config.segmentation;
        if let Some(p) = self.penalty {
            seg.penalty = p;
        }
        if let Some(g) = self.gamma {
            seg.gamma = g;
        }
        if let Some(m) = self.min_segment_frames {
            seg.min_segment_frames = m;
        }
        if let Some(path) = &self.weights {
            seg.class_weights = config::read_weights(path)?;
        }
        if self.no_prune {
            seg.prune = false;
        }
        Ok(())
    }
}

impl FeatureFlags {
    fn apply(&self, config: &mut Config) -> anyhow::Result<()> {
        if self.schema != "default" {
            anyhow::bail!("unknown feature schema {:?} (only \"default\")", self.schema);
        }
        if let Some(l) = self.decay_lambda {
            config.features.decay_lambda = l;
        }
        Ok(())
    }
}

/// Parses `args` (program name first) and runs the subcommand.
///
/// Returns 0 on success, 1 when the run fails and 2 for usage errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
