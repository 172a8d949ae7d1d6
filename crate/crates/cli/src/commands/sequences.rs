//! Subcommands that produce or consume gesture sequences.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gestureflow::features::{assemble_feature_vector, FeatureSchema, FeatureVector};
use gestureflow::gesture::{
    parse_gesture_sequence, parse_probability_stream, GestureSequence, ParseOptions, UnknownPolicy,
};
use gestureflow::matrix::FeatureMatrix;
use gestureflow::segmentation::{aggregate, default_penalty_grid, penalty_sweep, Signal};
use gestureflow::synthetic::{case_render_config, generate_case, render_stream, OutcomeModel};
use serde::Serialize;

use super::json_bytes;
use crate::config::Config;
use crate::io::{csv_inputs, default_out_dir, par_map};
use crate::manifest::{beside, Recorder};
use crate::{FeaturesArgs, PipelineArgs, SegmentArgs, SweepArgs, SynthArgs};

fn parse_options(exclude_unknown: bool) -> ParseOptions {
    ParseOptions {
        unknown: if exclude_unknown {
            UnknownPolicy::Exclude
        } else {
            UnknownPolicy::Reject
        },
    }
}

fn record_config(rec: &mut Recorder, path: &Option<PathBuf>) {
    if let Some(p) = path {
        rec.input(p);
    }
}

pub(crate) fn segment(args: SegmentArgs) -> Result<()> {
    let config = args.common.resolve(|c| args.seg.apply(c))?;
    let alphabet = config.alphabet()?;
    let inputs = csv_inputs(&args.probs)?;
    let mut rec = Recorder::start("segment");
    rec.inputs(&inputs);
    record_config(&mut rec, &args.common.config);
    record_config(&mut rec, &args.seg.weights);

    let sequences = par_map(config.jobs(), &inputs, |path| {
        let stream = parse_probability_stream(path, &alphabet)?;
        Ok(aggregate(&stream, &config.segmentation)?)
    })?;

    let manifest = if args.probs.is_dir() {
        let dir = args.out.unwrap_or_else(default_out_dir);
        for seq in &sequences {
            rec.output(&dir.join(format!("{}.csv", seq.case_id())), seq.to_csv_string().as_bytes())?;
        }
        dir.join("segment.manifest.json")
    } else {
        let seq = &sequences[0];
        let out = args
            .out
            .unwrap_or_else(|| default_out_dir().join(format!("{}.gestures.csv", seq.case_id())));
        rec.output(&out, seq.to_csv_string().as_bytes())?;
        beside(&out)
    };
    rec.finish(&config, &manifest)?;
    Ok(())
}

fn feature_rows(config: &Config, sequences: &[GestureSequence]) -> Result<FeatureMatrix> {
    let schema = FeatureSchema::new(config.alphabet()?, config.features.clone())?;
    let vectors: Vec<FeatureVector> = par_map(config.jobs(), sequences, |seq| {
        assemble_feature_vector(seq, &schema).with_context(|| format!("case {}", seq.case_id()))
    })?;
    Ok(FeatureMatrix::from_vectors(&vectors)?)
}

pub(crate) fn features(args: FeaturesArgs) -> Result<()> {
    let config = args.common.resolve(|c| args.feat.apply(c))?;
    let alphabet = config.alphabet()?;
    let inputs = csv_inputs(&args.gestures)?;
    let mut rec = Recorder::start("features");
    rec.inputs(&inputs);
    record_config(&mut rec, &args.common.config);

    let options = parse_options(args.feat.exclude_unknown);
    let sequences = par_map(config.jobs(), &inputs, |p| Ok(parse_gesture_sequence(p, &alphabet, options)?))?;
    let matrix = feature_rows(&config, &sequences)?;
    let out = args.out.unwrap_or_else(|| default_out_dir().join("features.csv"));
    rec.output(&out, matrix.to_csv_string().as_bytes())?;
    rec.finish(&config, &beside(&out))?;
    Ok(())
}

#[derive(Serialize)]
struct CaseSummary {
    case_id: String,
    n_frames: usize,
    gamma: f64,
    n_events: usize,
}

#[derive(Serialize)]
struct PipelineReport {
    penalty: f64,
    min_segment_frames: usize,
    cases: Vec<CaseSummary>,
}

pub(crate) fn pipeline(args: PipelineArgs) -> Result<()> {
    let config = args.common.resolve(|c| {
        args.seg.apply(c)?;
        args.feat.apply(c)
    })?;
    let alphabet = config.alphabet()?;
    let inputs = csv_inputs(&args.probs)?;
    let mut rec = Recorder::start("pipeline");
    rec.inputs(&inputs);
    record_config(&mut rec, &args.common.config);
    record_config(&mut rec, &args.seg.weights);

    let results = par_map(config.jobs(), &inputs, |path| {
        let stream = parse_probability_stream(path, &alphabet)?;
        let gamma = config.segmentation.gamma.resolve(Signal::from(&stream));
        let seq = aggregate(&stream, &config.segmentation)?;
        let summary = CaseSummary {
            case_id: seq.case_id().to_string(),
            n_frames: stream.len(),
            gamma,
            n_events: seq.len(),
        };
        Ok((seq, summary))
    })?;
    let (sequences, mut cases): (Vec<GestureSequence>, Vec<CaseSummary>) = results.into_iter().unzip();
    cases.sort_by(|a, b| a.case_id.cmp(&b.case_id));

    let matrix = feature_rows(&config, &sequences)?;
    let out = args
        .out_features
        .unwrap_or_else(|| default_out_dir().join("features.csv"));
    rec.output(&out, matrix.to_csv_string().as_bytes())?;
    if let Some(dir) = &args.out_gestures {
        for seq in &sequences {
            rec.output(&dir.join(format!("{}.csv", seq.case_id())), seq.to_csv_string().as_bytes())?;
        }
    }
    if let Some(path) = &args.out_report {
        let report = PipelineReport {
            penalty: config.segmentation.penalty,
            min_segment_frames: config.segmentation.min_segment_frames,
            cases,
        };
        rec.output(path, &json_bytes(&report)?)?;
    }
    rec.finish(&config, &beside(&out))?;
    Ok(())
}

pub(crate) fn sweep(args: SweepArgs) -> Result<()> {
    let config = args.common.resolve(|c| args.seg.apply(c))?;
    let alphabet = config.alphabet()?;
    let mut rec = Recorder::start("sweep");
    rec.input(&args.probs);
    record_config(&mut rec, &args.common.config);
    let stream = parse_probability_stream(&args.probs, &alphabet)?;
    let reference = match &args.gestures {
        Some(p) => {
            rec.input(p);
            Some(parse_gesture_sequence(p, &alphabet, ParseOptions::default())?)
        }
        None => None,
    };
    let penalties = args.penalties.clone().unwrap_or_else(default_penalty_grid);
    let points = penalty_sweep(&stream, &config.segmentation, &penalties, reference.as_ref())?;
    let out = args
        .out
        .unwrap_or_else(|| default_out_dir().join(format!("{}.sweep.json", stream.case_id())));
    rec.output(&out, &json_bytes(&points)?)?;
    rec.finish(&config, &beside(&out))?;
    Ok(())
}

pub(crate) fn synth(args: SynthArgs) -> Result<()> {
    let config = args.common.resolve(|c| {
        if let Some(n) = args.n_cases {
            c.cohort.n_cases = n;
        }
        if let Some(n) = args.n_events {
            c.synth.n_events = n;
        }
        if let Some(s) = args.noise_sigma {
            c.synth.noise_sigma = s;
        }
        if let Some(t) = args.temperature {
            c.synth.temperature = t;
        }
        if let Some(e) = args.effect {
            c.cohort.outcome = OutcomeModel::planted(e);
        }
        if args.no_render {
            c.cohort.render = false;
        }
        Ok(())
    })?;
    let out_dir = args.out_dir.clone().unwrap_or_else(|| default_out_dir().join("cohort"));
    let mut rec = Recorder::start("synth");
    record_config(&mut rec, &args.common.config);

    let indices: Vec<usize> = (0..config.cohort.n_cases).collect();
    let cases = par_map(config.jobs(), &indices, |&i| {
        let case = generate_case(&config.synth, &config.cohort.outcome, i)?;
        let stream = if config.cohort.render {
            Some(render_stream(&case.sequence, &case_render_config(&config.synth, &case))?)
        } else {
            None
        };
        Ok((case, stream))
    })?;

    let mut outcomes = gestureflow::OutcomeTable::new();
    for (case, stream) in &cases {
        let id = case.sequence.case_id();
        rec.output(&case_path(&out_dir, "gestures", id), case.sequence.to_csv_string().as_bytes())?;
        if let Some(stream) = stream {
            rec.output(&case_path(&out_dir, "probs", id), stream.to_csv_string().as_bytes())?;
        }
        outcomes.insert(id, case.outcome)?;
    }
    rec.output(&out_dir.join("outcomes.csv"), outcomes.to_csv_string().as_bytes())?;
    rec.finish(&config, &out_dir.join("synth.manifest.json"))?;
    Ok(())
}

fn case_path(root: &Path, kind: &str, id: &str) -> PathBuf {
    root.join(kind).join(format!("{id}.csv"))
}
