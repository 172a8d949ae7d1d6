//! Subcommands that score streams or analyze feature matrices.

use std::path::Path;

use anyhow::{bail, Result};
use gestureflow::cv::{cross_validate, CvReport};
use gestureflow::gesture::{
    parse_gesture_sequence, parse_outcome_table, parse_probability_stream, ParseOptions, UnknownPolicy,
};
use gestureflow::matrix::{FeatureMatrix, LabeledMatrix};
use gestureflow::metrics::{frame_level_auc, video_level_auc, AucReport};
use gestureflow::stats::{concordance, rank_features, ConcordanceReport, PairedEffect, RankedFeature, TTestKind};
use serde::Serialize;

use super::json_bytes;
use crate::io::default_out_dir;
use crate::manifest::{beside, Recorder};
use crate::{EvaluateArgs, PredictArgs, StatsArgs};

#[derive(Serialize)]
struct EvaluateReport {
    #[serde(flatten)]
    report: AucReport,
    video_auc: f64,
}

pub(crate) fn evaluate(args: EvaluateArgs) -> Result<()> {
    let config = args.common.resolve(|_| Ok(()))?;
    let alphabet = config.alphabet()?;
    let mut rec = Recorder::start("evaluate");
    rec.input(&args.probs);
    rec.input(&args.gestures);
    let stream = parse_probability_stream(&args.probs, &alphabet)?;
    let options = ParseOptions {
        unknown: if args.exclude_unknown {
            UnknownPolicy::Exclude
        } else {
            UnknownPolicy::Reject
        },
    };
    let truth = parse_gesture_sequence(&args.gestures, &alphabet, options)?;
    let report = frame_level_auc(&stream, &truth)?;
    let video_auc = video_level_auc(&report)?;
    let out = args
        .out
        .unwrap_or_else(|| default_out_dir().join(format!("{}.auc.json", stream.case_id())));
    rec.output(&out, &json_bytes(&EvaluateReport { report, video_auc })?)?;
    rec.finish(&config, &beside(&out))?;
    Ok(())
}

fn labeled(matrix: &Path, outcomes: &gestureflow::OutcomeTable) -> Result<LabeledMatrix> {
    Ok(LabeledMatrix::new(FeatureMatrix::read_path(matrix)?, outcomes)?)
}

fn ranking_tsv(ranked: &[RankedFeature]) -> String {
    let mut out = String::from("rank\tfeature\tt\tp\td\tmean_poor\tsd_poor\tmean_good\tsd_good\tdegenerate\n");
    for (i, f) in ranked.iter().enumerate() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            i + 1,
            f.name,
            f.t,
            f.p,
            f.d,
            f.mean_poor,
            f.sd_poor,
            f.mean_good,
            f.sd_good,
            u8::from(f.degenerate)
        ));
    }
    out
}

#[derive(Serialize)]
struct GroupStats<'a> {
    name: &'a str,
    mean_poor: f64,
    sd_poor: f64,
    mean_good: f64,
    sd_good: f64,
}

#[derive(Serialize)]
struct ConcordanceSummary<'a> {
    test: TTestKind,
    top_k: usize,
    overlap_count: usize,
    overlap_fraction: f64,
    delta_d_avg: Option<f64>,
    pearson_r_of_d: Option<f64>,
    pearson_p_of_d: Option<f64>,
    /// False when fewer than three overlapping features leave r undefined.
    correlation_defined: bool,
    sign_agreement: usize,
    overlap: &'a [PairedEffect],
    groups_a: Vec<GroupStats<'a>>,
    groups_b: Vec<GroupStats<'a>>,
}

fn groups<'a>(ranked: &'a [RankedFeature], overlap: &[PairedEffect]) -> Vec<GroupStats<'a>> {
    overlap
        .iter()
        .filter_map(|o| ranked.iter().find(|f| f.name == o.name))
        .map(|f| GroupStats {
            name: &f.name,
            mean_poor: f.mean_poor,
            sd_poor: f.sd_poor,
            mean_good: f.mean_good,
            sd_good: f.sd_good,
        })
        .collect()
}

fn summary<'a>(report: &'a ConcordanceReport, test: TTestKind) -> ConcordanceSummary<'a> {
    ConcordanceSummary {
        test,
        top_k: report.top_k,
        overlap_count: report.overlap_count(),
        overlap_fraction: report.overlap_fraction(),
        delta_d_avg: report.delta_d_avg,
        pearson_r_of_d: report.pearson_r_of_d,
        pearson_p_of_d: report.pearson_p_of_d,
        correlation_defined: report.pearson_r_of_d.is_some(),
        sign_agreement: report.sign_agreement,
        overlap: &report.overlap,
        groups_a: groups(&report.ranked_a, &report.overlap),
        groups_b: groups(&report.ranked_b, &report.overlap),
    }
}

pub(crate) fn stats(args: StatsArgs) -> Result<()> {
    let config = args.common.resolve(|c| {
        if let Some(k) = args.top_k {
            c.stats.top_k = k;
        }
        if args.welch {
            c.stats.test = TTestKind::Welch;
        }
        Ok(())
    })?;
    let mut rec = Recorder::start("stats");
    rec.input(&args.matrix_a);
    rec.input(&args.outcomes);
    let outcomes = parse_outcome_table(&args.outcomes)?;
    let a = labeled(&args.matrix_a, &outcomes)?;
    let test = config.stats.test;
    let out = match &args.matrix_b {
        Some(path_b) => {
            rec.input(path_b);
            let b = labeled(path_b, &outcomes)?;
            if a.matrix().case_ids() != b.matrix().case_ids() {
                bail!("the two matrices cover different cases");
            }
            let report = concordance(&a, &b, config.stats.top_k, test)?;
            let out = args.out.clone().unwrap_or_else(|| default_out_dir().join("concordance.tsv"));
            rec.output(&out, report.to_tsv().as_bytes())?;
            rec.output(&out.with_extension("summary.json"), &json_bytes(&summary(&report, test))?)?;
            out
        }
        None => {
            let ranked = rank_features(&a, test);
            let out = args.out.clone().unwrap_or_else(|| default_out_dir().join("ranking.tsv"));
            rec.output(&out, ranking_tsv(&ranked).as_bytes())?;
            out
        }
    };
    rec.finish(&config, &beside(&out))?;
    Ok(())
}

pub(crate) fn predict(args: PredictArgs) -> Result<()> {
    let config = args.common.resolve(|c| {
        if let Some(k) = args.k {
            c.cv.k = k;
        }
        if let Some(l2) = args.l2 {
            c.cv.l2 = l2;
        }
        if args.no_standardize {
            c.cv.standardize = false;
        }
        if let Some(m) = args.max_iters {
            c.cv.max_iters = m;
        }
        if let Some(t) = args.tolerance {
            c.cv.tolerance = t;
        }
        if let Some(ci) = args.ci {
            c.cv.ci = ci.into();
        }
        Ok(())
    })?;
    let mut rec = Recorder::start("predict");
    rec.input(&args.matrix);
    rec.input(&args.outcomes);
    let outcomes = parse_outcome_table(&args.outcomes)?;
    let data = labeled(&args.matrix, &outcomes)?;
    let report: CvReport = cross_validate(&data, &config.cv)?;
    let out = args.out.unwrap_or_else(|| default_out_dir().join("cv.json"));
    rec.output(&out, &json_bytes(&report)?)?;
    rec.finish(&config, &beside(&out))?;
    Ok(())
}
