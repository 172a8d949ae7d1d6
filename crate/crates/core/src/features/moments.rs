/// Spread below this fraction of the largest magnitude counts as zero, so
/// that rounding noise in equal values does not produce huge skew/kurtosis.
pub const DEGENERATE_SPREAD: f64 = 1e-12;

/// Descriptive statistics with finite sentinels for short samples.
///
/// * n = 0: everything 0
/// * n = 1: mean, min, max, median and sum equal the value; std, skew, kurt 0
/// * n = 2: skew and kurt 0
/// * zero spread: std, skew, kurt 0
///
/// `std` is the sample (n-1) deviation, `skew` the Fisher-Pearson g1 and
/// `kurt` the excess g2, both from population central moments.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub skew: f64,
    pub kurt: f64,
    pub sum: f64,
}

pub fn summarize(xs: &[f64]) -> Summary {
    let n = xs.len();
    if n == 0 {
        return Summary::default();
    }
    let sum: f64 = xs.iter().sum();
    let mean = sum / n as f64;
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let mut out = Summary {
        mean,
        std: 0.0,
        min: sorted[0],
        max: sorted[n - 1],
        median,
        skew: 0.0,
        kurt: 0.0,
        sum,
    };
    if n == 1 {
        return out;
    }

    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let scale = out.min.abs().max(out.max.abs());
    if m2.sqrt() <= DEGENERATE_SPREAD * scale * (n as f64).sqrt() || m2 == 0.0 {
        return out;
    }
    out.std = (m2 / (n - 1) as f64).sqrt();
    if n > 2 {
        let nf = n as f64;
        let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
        out.skew = m3 / m2.powf(1.5);
        out.kurt = m4 / (m2 * m2) - 3.0;
    }
    out
}
