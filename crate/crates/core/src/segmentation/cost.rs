use crate::error::{Error, Result};

/// Upper bound on the number of frames entering the median heuristic; longer
/// signals are subsampled with a fixed stride.
pub const MEDIAN_SUBSAMPLE: usize = 512;

/// Borrowed row-major matrix of `len() x dim` observations.
#[derive(Debug, Clone, Copy)]
pub struct Signal<'a> {
    data: &'a [f64],
    dim: usize,
}

impl<'a> Signal<'a> {
    pub fn new(data: &'a [f64], dim: usize) -> Self {
        assert!(dim > 0 && data.len() % dim == 0, "ragged signal");
        Self { data, dim }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

impl<'a> From<&'a crate::gesture::FrameProbabilityStream> for Signal<'a> {
    fn from(stream: &'a crate::gesture::FrameProbabilityStream) -> Self {
        Signal::new(stream.as_flat(), stream.k())
    }
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Gaussian kernel `exp(-gamma * |a - b|^2)`.
#[inline]
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}

/// Kernel segment cost of rows `a..b`:
/// `sum_t k(y_t, y_t) - (1/(b-a)) * sum_{s,t} k(y_s, y_t)`.
///
/// This is the within-segment scatter in the kernel feature space, so it is
/// zero exactly when all rows coincide.
pub fn rbf_cost(signal: Signal<'_>, a: usize, b: usize, gamma: f64) -> Result<f64> {
    if a >= b || b > signal.len() {
        return Err(Error::validation(format!(
            "segment [{a}, {b}) is empty or outside a signal of length {}",
            signal.len()
        )));
    }
    let len = (b - a) as f64;
    let mut pair_sum = 0.0;
    for s in a..b {
        pair_sum += 1.0;
        for t in s + 1..b {
            pair_sum += 2.0 * rbf_kernel(signal.row(s), signal.row(t), gamma);
        }
    }
    Ok((len - pair_sum / len).max(0.0))
}

/// Median heuristic bandwidth: `1 / median` of pairwise squared distances.
///
/// All pairs are used up to [`MEDIAN_SUBSAMPLE`] frames; beyond that every
/// `ceil(n / 512)`-th frame is kept. A zero median (more than half the pairs
/// identical) falls back to 1.
pub fn resolve_gamma(signal: Signal<'_>) -> f64 {
    let n = signal.len();
    if n < 2 {
        return 1.0;
    }
    let step = n.div_ceil(MEDIAN_SUBSAMPLE);
    let idx: Vec<usize> = (0..n).step_by(step).collect();
    let mut dists = Vec::with_capacity(idx.len() * (idx.len() - 1) / 2);
    for (i, &a) in idx.iter().enumerate() {
        for &b in &idx[i + 1..] {
            dists.push(squared_distance(signal.row(a), signal.row(b)));
        }
    }
    if dists.is_empty() {
        return 1.0;
    }
    dists.sort_by(f64::total_cmp);
    let m = dists.len();
    let median = if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    };
    if median > 0.0 {
        1.0 / median
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_rows_cost_nothing() {
        let data = [0.2, 0.8].repeat(5);
        let s = Signal::new(&data, 2);
        assert_eq!(rbf_cost(s, 0, 5, 0.7).unwrap(), 0.0);
        assert_eq!(rbf_cost(s, 2, 3, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn empty_range_is_an_error() {
        let data = [1.0, 0.0];
        let s = Signal::new(&data, 2);
        assert!(rbf_cost(s, 1, 1, 1.0).is_err());
        assert!(rbf_cost(s, 0, 2, 1.0).is_err());
    }

    #[test]
    fn one_hot_pairs_match_double_sum() {
        // rows e1, e1, e2, e2 with gamma 1
        let data = [1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0];
        let s = Signal::new(&data, 2);
        let mut total = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let d: f64 = (0..2).map(|c| (data[i * 2 + c] - data[j * 2 + c]).powi(2)).sum();
                total += (-d).exp();
            }
        }
        let expected = 4.0 - total / 4.0;
        // 8 same-class pairs (kernel 1) and 8 cross pairs (kernel e^-2)
        assert!((expected - (2.0 - 2.0 * (-2.0f64).exp())).abs() < 1e-15);
        assert!((rbf_cost(s, 0, 4, 1.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn gamma_fallback_and_one_hot() {
        let same = [0.5, 0.5, 0.5, 0.5];
        assert_eq!(resolve_gamma(Signal::new(&same, 2)), 1.0);
        let one_hot = [1.0, 0.0, 0.0, 1.0];
        assert_eq!(resolve_gamma(Signal::new(&one_hot, 2)), 0.5);
        assert_eq!(resolve_gamma(Signal::new(&[1.0, 0.0], 2)), 1.0);
    }
}
