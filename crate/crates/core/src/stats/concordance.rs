use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::hypothesis::{cohens_d, mean, pearson_r, t_test, variance, TTestKind};
use crate::error::{Error, Result};
use crate::matrix::LabeledMatrix;

/// Outcome association of one feature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedFeature {
    pub name: String,
    /// t of good minus poor, 0 when degenerate.
    pub t: f64,
    pub p: f64,
    /// Cohen's d, good minus poor; 0 when degenerate.
    pub d: f64,
    /// Constant in both groups with different means, or zero pooled sd.
    pub degenerate: bool,
    pub mean_poor: f64,
    pub sd_poor: f64,
    pub mean_good: f64,
    pub sd_good: f64,
}

fn rank_order(a: &RankedFeature, b: &RankedFeature) -> Ordering {
    a.degenerate
        .cmp(&b.degenerate)
        .then(a.p.total_cmp(&b.p))
        .then(b.d.abs().total_cmp(&a.d.abs()))
        .then_with(|| a.name.cmp(&b.name))
}

/// Per-feature t-test and effect size, most significant first.
///
/// Order: ascending raw p (no multiple-testing correction), then larger |d|,
/// then name. Features whose test is degenerate come last with `p = 1`.
pub fn rank_features(data: &LabeledMatrix, kind: TTestKind) -> Vec<RankedFeature> {
    let names = data.matrix().names();
    let mut ranked: Vec<RankedFeature> = (0..names.len())
        .map(|f| {
            let (poor, good) = data.split(f);
            let test = t_test(&good, &poor, kind);
            let d = cohens_d(&poor, &good);
            let (t, p, d, degenerate) = match (test, d) {
                (Ok(test), Ok(d)) => (test.t, test.p, d, false),
                _ => (0.0, 1.0, 0.0, true),
            };
            RankedFeature {
                name: names[f].clone(),
                t,
                p,
                d,
                degenerate,
                mean_poor: mean(&poor),
                sd_poor: variance(&poor).sqrt(),
                mean_good: mean(&good),
                sd_good: variance(&good).sqrt(),
            }
        })
        .collect();
    ranked.sort_by(rank_order);
    ranked
}

/// Effect sizes of a feature in the top k of both sources.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedEffect {
    pub name: String,
    pub p_a: f64,
    pub p_b: f64,
    pub d_a: f64,
    pub d_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcordanceReport {
    pub top_k: usize,
    pub ranked_a: Vec<RankedFeature>,
    pub ranked_b: Vec<RankedFeature>,
    /// Features in both top-k lists, in source-a rank order.
    pub overlap: Vec<PairedEffect>,
    /// Mean of `|d_a - d_b|` over the overlap; `None` when it is empty.
    pub delta_d_avg: Option<f64>,
    /// Correlation of paired d values; `None` with fewer than 3 pairs or no
    /// spread.
    pub pearson_r_of_d: Option<f64>,
    pub pearson_p_of_d: Option<f64>,
    /// Overlapping features whose d has the same sign in both sources.
    pub sign_agreement: usize,
}

impl ConcordanceReport {
    pub fn overlap_count(&self) -> usize {
        self.overlap.len()
    }

    pub fn overlap_fraction(&self) -> f64 {
        self.overlap.len() as f64 / self.top_k as f64
    }

    /// `feature, p_a, p_b, d_a, d_b, in_overlap` for every feature, in
    /// source-a rank order.
    pub fn to_tsv(&self) -> String {
        let in_b: HashMap<&str, &RankedFeature> =
            self.ranked_b.iter().map(|f| (f.name.as_str(), f)).collect();
        let overlap: std::collections::HashSet<&str> =
            self.overlap.iter().map(|o| o.name.as_str()).collect();
        let mut out = String::from("feature\tp_a\tp_b\td_a\td_b\tin_overlap\n");
        for a in &self.ranked_a {
            let b = in_b[a.name.as_str()];
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                a.name,
                a.p,
                b.p,
                a.d,
                b.d,
                u8::from(overlap.contains(a.name.as_str()))
            );
        }
        out
    }
}

/// Compares the outcome association of the same features computed from two
/// sources (e.g. automatic vs manual annotation).
pub fn concordance(
    a: &LabeledMatrix,
    b: &LabeledMatrix,
    top_k: usize,
    kind: TTestKind,
) -> Result<ConcordanceReport> {
    if a.matrix().names() != b.matrix().names() {
        return Err(Error::validation("the two matrices have different feature names"));
    }
    let n = a.matrix().n_features();
    if top_k == 0 || top_k > n {
        return Err(Error::Config(format!("top-k must be in 1..={n}, got {top_k}")));
    }
    let ranked_a = rank_features(a, kind);
    let ranked_b = rank_features(b, kind);
    let top_b: HashMap<&str, &RankedFeature> = ranked_b[..top_k]
        .iter()
        .map(|f| (f.name.as_str(), f))
        .collect();
    let overlap: Vec<PairedEffect> = ranked_a[..top_k]
        .iter()
        .filter_map(|fa| {
            top_b.get(fa.name.as_str()).map(|fb| PairedEffect {
                name: fa.name.clone(),
                p_a: fa.p,
                p_b: fb.p,
                d_a: fa.d,
                d_b: fb.d,
            })
        })
        .collect();

    let delta_d_avg = (!overlap.is_empty()).then(|| {
        overlap.iter().map(|o| (o.d_a - o.d_b).abs()).sum::<f64>() / overlap.len() as f64
    });
    let da: Vec<f64> = overlap.iter().map(|o| o.d_a).collect();
    let db: Vec<f64> = overlap.iter().map(|o| o.d_b).collect();
    let corr = pearson_r(&da, &db).ok();
    let sign_agreement = overlap
        .iter()
        .filter(|o| o.d_a.signum() == o.d_b.signum())
        .count();

    Ok(ConcordanceReport {
        top_k,
        ranked_a,
        ranked_b,
        overlap,
        delta_d_avg,
        pearson_r_of_d: corr.map(|c| c.r),
        pearson_p_of_d: corr.map(|c| c.p),
        sign_agreement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gesture::Outcome;
    use crate::matrix::FeatureMatrix;

    fn labeled(names: &[&str], columns: &[Vec<f64>], outcomes: &[u8]) -> LabeledMatrix {
        let n = outcomes.len();
        let ids = (0..n).map(|i| format!("c{i:03}")).collect();
        let mut data = Vec::new();
        for i in 0..n {
            for col in columns {
                data.push(col[i]);
            }
        }
        let m = FeatureMatrix::new(ids, names.iter().map(|s| s.to_string()).collect(), data).unwrap();
        let o = outcomes.iter().map(|&c| Outcome::from_code(c).unwrap()).collect();
        LabeledMatrix::from_parts(m, o).unwrap()
    }

    #[test]
    fn discriminative_feature_ranks_first() {
        let y = [0, 0, 0, 1, 1, 1];
        let m = labeled(
            &["a_const", "signal", "z_const"],
            &[vec![1.0; 6], vec![0.1, 0.3, 0.2, 1.1, 1.3, 1.2], vec![5.0; 6]],
            &y,
        );
        let r = rank_features(&m, TTestKind::Student);
        assert_eq!(r[0].name, "signal");
        assert!(r[0].d > 0.0 && r[0].t > 0.0);
        assert!(r[1].degenerate && r[2].degenerate);
        assert_eq!((r[1].name.as_str(), r[1].p), ("a_const", 1.0));
    }

    #[test]
    fn identical_columns_tie_break_by_name() {
        let y = [0, 0, 0, 1, 1, 1];
        let col = vec![0.1, 0.5, 0.2, 0.4, 1.3, 0.2];
        let m = labeled(&["beta", "alpha"], &[col.clone(), col], &y);
        let r = rank_features(&m, TTestKind::Student);
        assert_eq!(r[0].name, "alpha");
        assert_eq!(r[1].name, "beta");
    }

    #[test]
    fn self_concordance() {
        let y = [0, 1, 0, 1, 0, 1, 0, 1];
        let cols: Vec<Vec<f64>> = (0..5)
            .map(|f| (0..8).map(|i| ((i * 7 + f * 3) % 5) as f64 + y[i] as f64 * f as f64).collect())
            .collect();
        let m = labeled(&["f0", "f1", "f2", "f3", "f4"], &cols, &y);
        let r = concordance(&m, &m, 5, TTestKind::Student).unwrap();
        assert_eq!(r.overlap_count(), 5);
        assert_eq!(r.delta_d_avg, Some(0.0));
        assert!((r.pearson_r_of_d.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.sign_agreement, 5);
        let tsv = r.to_tsv();
        assert_eq!(tsv.lines().count(), 6);
        assert!(tsv.starts_with("feature\tp_a\tp_b\td_a\td_b\tin_overlap\n"));
        assert!(concordance(&m, &m, 6, TTestKind::Student).is_err());
        assert!(concordance(&m, &m, 0, TTestKind::Student).is_err());
    }

    #[test]
    fn disjoint_signals_have_no_overlap() {
        let y = [0, 0, 0, 1, 1, 1];
        let signal = vec![0.1, 0.3, 0.2, 1.1, 1.3, 1.2];
        let noise = vec![0.5, 0.1, 0.9, 0.4, 0.8, 0.2];
        let a = labeled(&["x", "y"], &[signal.clone(), noise.clone()], &y);
        let b = labeled(&["x", "y"], &[noise, signal], &y);
        let r = concordance(&a, &b, 1, TTestKind::Student).unwrap();
        assert_eq!(r.overlap_count(), 0);
        assert_eq!(r.delta_d_avg, None);
        assert_eq!(r.pearson_r_of_d, None);
    }
}
