//! Stratified k-fold cross-validation of outcome prediction.
//!
//! The classifier is pluggable through [`Classifier`]; the bundled baseline is
//! an L2-regularized logistic regression fit by full-batch accelerated
//! gradient descent on train-fold-standardized features.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gesture::{Outcome, OutcomeTable};
use crate::matrix::LabeledMatrix;

/// z value of a two-sided 95% normal interval.
const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMethod {
    /// `mean +- 1.96 * sd / sqrt(k)` over fold accuracies.
    #[default]
    Normal,
    /// Percentile interval of resampled fold-accuracy means.
    Bootstrap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    pub standardize: bool,
    pub l2: f64,
    pub max_iters: usize,
    pub tolerance: f64,
    pub ci: CiMethod,
    pub bootstrap_resamples: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            k: 5,
            seed: 0,
            standardize: true,
            l2: 1.0,
            max_iters: 2000,
            tolerance: 1e-6,
            ci: CiMethod::Normal,
            bootstrap_resamples: 10_000,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k must be >= 2, got {}", self.k)));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::Config(format!("l2 must be >= 0, got {}", self.l2)));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::Config("tolerance must be >= 0".into()));
        }
        if self.ci == CiMethod::Bootstrap && self.bootstrap_resamples == 0 {
            return Err(Error::Config("bootstrap needs at least one resample".into()));
        }
        Ok(())
    }

    pub fn baseline(&self) -> LogisticBaseline {
        LogisticBaseline {
            l2: self.l2,
            max_iters: self.max_iters,
            tolerance: self.tolerance,
            standardize: self.standardize,
        }
    }
}

/// Splits row indices into `k` folds with per-class round-robin dealing after
/// a seeded shuffle. Each class needs at least `k` members.
///
/// Dealing continues across classes from where the previous class stopped,
/// so fold sizes differ by at most one as well.
pub fn stratified_fold_indices(outcomes: &[Outcome], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("k must be >= 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in [Outcome::Poor, Outcome::Good] {
        let mut members: Vec<usize> = (0..outcomes.len()).filter(|&i| outcomes[i] == class).collect();
        if members.len() < k {
            return Err(Error::Config(format!(
                "{} {class:?} cases cannot fill {k} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Case-id folds for an outcome table.
pub fn stratified_folds(outcomes: &OutcomeTable, k: usize, seed: u64) -> Result<Vec<Vec<String>>> {
    let (ids, labels): (Vec<&str>, Vec<Outcome>) = outcomes.iter().unzip();
    Ok(stratified_fold_indices(&labels, k, seed)?
        .into_iter()
        .map(|f| f.into_iter().map(|i| ids[i].to_string()).collect())
        .collect())
}

pub trait Predictor {
    fn predict(&self, row: &[f64]) -> Outcome;
}

pub trait Classifier {
    type Model: Predictor;
    fn fit(&self, train: &LabeledMatrix) -> Result<Self::Model>;
}

/// Per-feature centering and scaling learned from training rows only.
/// Constant columns map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// Population standard deviations; 0 marks a constant column.
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit<'a>(rows: impl Iterator<Item = &'a [f64]>, n_features: usize) -> Self {
        let rows: Vec<&[f64]> = rows.collect();
        let n = rows.len().max(1) as f64;
        let mut means = vec![0.0; n_features];
        for r in &rows {
            for (m, v) in means.iter_mut().zip(r.iter()) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut scales = vec![0.0; n_features];
        for r in &rows {
            for ((s, v), m) in scales.iter_mut().zip(r.iter()).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut scales {
            *s = (*s / n).sqrt();
            if s.is_nan() || *s <= 1e-12 {
                *s = 0.0;
            }
        }
        Self { means, scales }
    }

    pub fn transform(&self, row: &[f64], out: &mut [f64]) {
        for (((o, v), m), s) in out.iter_mut().zip(row).zip(&self.means).zip(&self.scales) {
            *o = if *s > 0.0 { (v - m) / s } else { 0.0 };
        }
    }
}

/// Mean logistic loss plus `l2 / (2n) * |w|^2` (the bias is not penalized).
pub struct LogisticObjective<'a> {
    /// Row-major `n x p` design.
    pub x: &'a [f64],
    /// Targets in {0, 1}.
    pub y: &'a [f64],
    pub n_features: usize,
    pub l2: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl LogisticObjective<'_> {
    fn n(&self) -> usize {
        self.y.len()
    }

    fn margins(&self, w: &[f64], b: f64) -> impl Iterator<Item = f64> + '_ {
        let w = w.to_vec();
        self.x
            .chunks(self.n_features.max(1))
            .take(self.n())
            .map(move |row| b + row.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>())
    }

    pub fn loss(&self, w: &[f64], b: f64) -> f64 {
        let n = self.n() as f64;
        let data: f64 = self
            .margins(w, b)
            .zip(self.y)
            .map(|(z, y)| softplus(z) - y * z)
            .sum();
        data / n + self.l2 / (2.0 * n) * w.iter().map(|v| v * v).sum::<f64>()
    }

    /// Gradient with respect to `(w, b)`.
    pub fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64) {
        let n = self.n() as f64;
        let p = self.n_features;
        let mut gw: Vec<f64> = w.iter().map(|v| self.l2 / n * v).collect();
        let mut gb = 0.0;
        let residuals: Vec<f64> = self.margins(w, b).zip(self.y).map(|(z, y)| sigmoid(z) - y).collect();
        for (row, r) in self.x.chunks(p.max(1)).zip(&residuals) {
            for (g, v) in gw.iter_mut().zip(row) {
                *g += r * v / n;
            }
            gb += r / n;
        }
        (gw, gb)
    }

    /// Power-iteration estimate of the gradient's Lipschitz constant.
    fn lipschitz(&self) -> f64 {
        let p = self.n_features;
        let n = self.n() as f64;
        // largest eigenvalue of [X 1]^T [X 1] / n
        let mut v = vec![1.0; p + 1];
        let mut lambda = 1.0;
        for _ in 0..100 {
            let mut next = vec![0.0; p + 1];
            for row in self.x.chunks(p.max(1)).take(self.n()) {
                let z: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() + v[p];
                for (o, a) in next.iter_mut().zip(row) {
                    *o += z * a / n;
                }
                next[p] += z / n;
            }
            let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
            let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            lambda = norm / vnorm;
            v = next;
        }
        0.25 * lambda + self.l2 / n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticBaseline {
    pub l2: f64,
    pub max_iters: usize,
    pub tolerance: f64,
    pub standardize: bool,
}

impl Default for LogisticBaseline {
    fn default() -> Self {
        CvConfig::default().baseline()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub standardizer: Option<Standardizer>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
}

impl LogisticModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        let mut buf;
        let x = match &self.standardizer {
            Some(s) => {
                buf = vec![0.0; row.len()];
                s.transform(row, &mut buf);
                &buf[..]
            }
            None => row,
        };
        self.bias + x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }
}

impl Predictor for LogisticModel {
    fn predict(&self, row: &[f64]) -> Outcome {
        if self.decision(row) >= 0.0 {
            Outcome::Good
        } else {
            Outcome::Poor
        }
    }
}

impl Classifier for LogisticBaseline {
    type Model = LogisticModel;

    fn fit(&self, train: &LabeledMatrix) -> Result<LogisticModel> {
        fit_baseline(train, self)
    }
}

/// Fits the logistic baseline. Columns that are constant on the training rows
/// keep a zero weight.
pub fn fit_baseline(train: &LabeledMatrix, config: &LogisticBaseline) -> Result<LogisticModel> {
    let m = train.matrix();
    let (n, p) = (m.n_cases(), m.n_features());
    if m.rows().flatten().any(|v| !v.is_finite()) {
        return Err(Error::validation("non-finite training value"));
    }
    let standardizer = Standardizer::fit(m.rows(), p);
    let mut x = vec![0.0; n * p];
    if config.standardize {
        for (row, out) in m.rows().zip(x.chunks_mut(p.max(1))) {
            standardizer.transform(row, out);
        }
    } else {
        for (row, out) in m.rows().zip(x.chunks_mut(p.max(1))) {
            out.copy_from_slice(row);
        }
    }
    let active: Vec<bool> = standardizer.scales.iter().map(|&s| s > 0.0).collect();
    let y: Vec<f64> = train.outcomes().iter().map(|o| o.code() as f64).collect();
    let objective = LogisticObjective {
        x: &x,
        y: &y,
        n_features: p,
        l2: config.l2,
    };

    let step = 1.0 / objective.lipschitz();
    let mut w = vec![0.0; p];
    let mut b = 0.0;
    // Nesterov momentum with restart whenever the loss goes up
    let (mut w_prev, mut b_prev) = (w.clone(), b);
    let mut momentum = 1.0f64;
    let mut loss = objective.loss(&w, b);
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    while iterations < config.max_iters {
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / next_momentum;
        let yw: Vec<f64> = w.iter().zip(&w_prev).map(|(a, c)| a + beta * (a - c)).collect();
        let yb = b + beta * (b - b_prev);
        let (mut gw, gb) = objective.gradient(&yw, yb);
        for (g, &on) in gw.iter_mut().zip(&active) {
            if !on {
                *g = 0.0;
            }
        }
        let new_w: Vec<f64> = yw.iter().zip(&gw).map(|(a, g)| a - step * g).collect();
        let new_b = yb - step * gb;
        let new_loss = objective.loss(&new_w, new_b);
        iterations += 1;
        if new_loss > loss {
            // restart from the current iterate without momentum
            w_prev = w.clone();
            b_prev = b;
            momentum = 1.0;
            continue;
        }
        w_prev = std::mem::replace(&mut w, new_w);
        b_prev = b;
        b = new_b;
        loss = new_loss;
        momentum = next_momentum;

        let (mut g, gb) = objective.gradient(&w, b);
        for (v, &on) in g.iter_mut().zip(&active) {
            if !on {
                *v = 0.0;
            }
        }
        grad_norm = (g.iter().map(|v| v * v).sum::<f64>() + gb * gb).sqrt();
        if grad_norm <= config.tolerance {
            break;
        }
    }
    Ok(LogisticModel {
        standardizer: config.standardize.then_some(standardizer),
        weights: w,
        bias: b,
        iterations,
        gradient_norm: grad_norm,
    })
}

/// Fraction of rows whose prediction matches the outcome.
pub fn accuracy<P: Predictor>(model: &P, data: &LabeledMatrix) -> f64 {
    let m = data.matrix();
    let hits = m
        .rows()
        .zip(data.outcomes())
        .filter(|(row, o)| model.predict(row) == **o)
        .count();
    hits as f64 / m.n_cases() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub ci95: (f64, f64),
    pub ci_method: CiMethod,
    /// Held-out case ids per fold.
    pub folds: Vec<Vec<String>>,
}

/// 95% interval for the mean of fold accuracies.
pub fn confidence_interval(accuracies: &[f64], method: CiMethod, resamples: usize, seed: u64) -> (f64, f64) {
    let k = accuracies.len() as f64;
    let mean = accuracies.iter().sum::<f64>() / k;
    match method {
        CiMethod::Normal => {
            let sd = if accuracies.len() > 1 {
                (accuracies.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (k - 1.0)).sqrt()
            } else {
                0.0
            };
            let half = Z_95 * sd / k.sqrt();
            (mean - half, mean + half)
        }
        CiMethod::Bootstrap => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut means: Vec<f64> = (0..resamples)
                .map(|_| {
                    (0..accuracies.len())
                        .map(|_| accuracies[rng.random_range(0..accuracies.len())])
                        .sum::<f64>()
                        / k
                })
                .collect();
            means.sort_by(f64::total_cmp);
            let at = |q: f64| means[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
            (at(0.025).min(mean), at(0.975).max(mean))
        }
    }
}

/// Runs k-fold cross-validation with explicit folds and any classifier.
pub fn cross_validate_with<C: Classifier>(
    data: &LabeledMatrix,
    folds: &[Vec<usize>],
    classifier: &C,
) -> Result<Vec<f64>> {
    let n = data.matrix().n_cases();
    folds
        .iter()
        .map(|held_out| {
            let mut is_test = vec![false; n];
            for &i in held_out {
                is_test[i] = true;
            }
            let train_rows: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
            let train = data.subset(&train_rows)?;
            let test = data.subset(held_out)?;
            let model = classifier.fit(&train)?;
            Ok(accuracy(&model, &test))
        })
        .collect()
}

/// Stratified k-fold accuracy of the logistic baseline.
pub fn cross_validate(data: &LabeledMatrix, config: &CvConfig) -> Result<CvReport> {
    config.validate()?;
    let folds = stratified_fold_indices(data.outcomes(), config.k, config.seed)?;
    let fold_accuracies = cross_validate_with(data, &folds, &config.baseline())?;
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
    let ci95 = confidence_interval(&fold_accuracies, config.ci, config.bootstrap_resamples, config.seed);
    let ids = data.matrix().case_ids();
    Ok(CvReport {
        k: config.k,
        seed: config.seed,
        fold_accuracies,
        mean_accuracy,
        ci95,
        ci_method: config.ci,
        folds: folds
            .iter()
            .map(|f| f.iter().map(|&i| ids[i].clone()).collect())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::FeatureMatrix;

    fn outcomes(poor: usize, good: usize) -> Vec<Outcome> {
        let mut v = vec![Outcome::Poor; poor];
        v.extend(vec![Outcome::Good; good]);
        v
    }

    #[test]
    fn forced_allocation() {
        let folds = stratified_fold_indices(&outcomes(5, 5), 5, 3).unwrap();
        for f in &folds {
            assert_eq!(f.len(), 2);
            assert_eq!(f.iter().filter(|&&i| i < 5).count(), 1);
        }
    }

    #[test]
    fn uneven_allocation() {
        let o = outcomes(3, 7);
        let folds = stratified_fold_indices(&o, 3, 11).unwrap();
        for f in &folds {
            let good = f.iter().filter(|&&i| o[i] == Outcome::Good).count();
            let poor = f.len() - good;
            assert!((2..=3).contains(&good), "{good}");
            assert_eq!(poor, 1);
        }
    }

    #[test]
    fn folds_are_deterministic_and_partition() {
        let o = outcomes(13, 21);
        let a = stratified_fold_indices(&o, 4, 99).unwrap();
        assert_eq!(a, stratified_fold_indices(&o, 4, 99).unwrap());
        assert_ne!(a, stratified_fold_indices(&o, 4, 100).unwrap());
        let mut all: Vec<usize> = a.concat();
        all.sort_unstable();
        assert_eq!(all, (0..34).collect::<Vec<_>>());
    }

    #[test]
    fn too_few_cases_per_class() {
        assert!(stratified_fold_indices(&outcomes(2, 10), 3, 0).is_err());
        assert!(stratified_fold_indices(&outcomes(5, 5), 1, 0).is_err());
    }

    #[test]
    fn folds_by_case_id() {
        let table: OutcomeTable = (0..6)
            .map(|i| (format!("case{i}"), if i % 2 == 0 { Outcome::Poor } else { Outcome::Good }))
            .collect();
        let folds = stratified_folds(&table, 3, 1).unwrap();
        assert_eq!(folds.len(), 3);
        assert!(folds.iter().all(|f| f.len() == 2));
    }

    fn separable(n: usize) -> LabeledMatrix {
        let ids = (0..n).map(|i| format!("c{i:03}")).collect();
        let data = (0..n).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let m = FeatureMatrix::new(ids, vec!["x".into()], data).unwrap();
        let o = (0..n).map(|i| if i % 2 == 0 { Outcome::Poor } else { Outcome::Good }).collect();
        LabeledMatrix::from_parts(m, o).unwrap()
    }

    #[test]
    fn separable_training_accuracy() {
        let data = separable(20);
        let model = fit_baseline(&data, &LogisticBaseline::default()).unwrap();
        assert_eq!(accuracy(&model, &data), 1.0);
        assert!(model.weights[0] > 0.0);
    }

    #[test]
    fn flipped_labels_flip_predictions() {
        let data = separable(20);
        let flipped: Vec<Outcome> = data
            .outcomes()
            .iter()
            .map(|o| if *o == Outcome::Good { Outcome::Poor } else { Outcome::Good })
            .collect();
        let flipped = LabeledMatrix::from_parts(data.matrix().clone(), flipped).unwrap();
        let a = fit_baseline(&data, &LogisticBaseline::default()).unwrap();
        let b = fit_baseline(&flipped, &LogisticBaseline::default()).unwrap();
        for row in data.matrix().rows() {
            assert_ne!(a.predict(row), b.predict(row));
        }
        assert!((a.weights[0] + b.weights[0]).abs() < 1e-9);
    }

    #[test]
    fn constant_feature_gets_zero_weight() {
        let ids = (0..8).map(|i| format!("c{i}")).collect();
        let data = (0..8).flat_map(|i| [if i < 4 { -1.0 } else { 1.0 }, 3.0]).collect();
        let m = FeatureMatrix::new(ids, vec!["x".into(), "k".into()], data).unwrap();
        let o = (0..8).map(|i| if i < 4 { Outcome::Poor } else { Outcome::Good }).collect();
        let lm = LabeledMatrix::from_parts(m, o).unwrap();
        for standardize in [true, false] {
            let cfg = LogisticBaseline {
                standardize,
                ..Default::default()
            };
            let model = fit_baseline(&lm, &cfg).unwrap();
            assert_eq!(model.weights[1], 0.0);
            assert_eq!(accuracy(&model, &lm), 1.0);
        }
    }

    #[test]
    fn normal_interval() {
        let (lo, hi) = confidence_interval(&[0.75, 0.75, 0.75], CiMethod::Normal, 0, 0);
        assert_eq!((lo, hi), (0.75, 0.75));
        let acc = [0.6, 0.7, 0.8, 0.9, 1.0];
        let (lo, hi) = confidence_interval(&acc, CiMethod::Normal, 0, 0);
        let half = 1.96 * 0.025f64.sqrt() / 5f64.sqrt();
        assert!((lo - (0.8 - half)).abs() < 1e-12 && (hi - (0.8 + half)).abs() < 1e-12);
        let (blo, bhi) = confidence_interval(&acc, CiMethod::Bootstrap, 2000, 4);
        assert!(blo <= 0.8 && 0.8 <= bhi);
        assert!(blo >= 0.6 && bhi <= 1.0);
    }
}
