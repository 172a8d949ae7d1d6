//! Frozen high-precision reference values for the statistics tests.
//!
//! `fixtures/stats_reference.json` is produced by
//! `fixtures/gen_stats_reference.py` (mpmath at 50 digits). For each case,
//! `t`/`p` are the pooled two-sample t-test of `a` against `b`, `d` is Cohen's
//! d with `a` as the poor and `b` as the good group, and `r`/`r_p` the Pearson
//! correlation of `x` and `y` with its two-sided p-value.

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
pub struct Case {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub t: f64,
    pub p: f64,
    pub d: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub r: f64,
    pub r_p: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TP {
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Reference {
    pub fixture_123_345: TP,
    pub cases: Vec<Case>,
}

pub fn reference() -> Reference {
    serde_json::from_str(include_str!("../fixtures/stats_reference.json")).expect("valid fixture")
}

/// True when `got` is within `tol` of `want`, relative for magnitudes above 1.
pub fn close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * want.abs().max(1.0)
}
