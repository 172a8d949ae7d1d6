//! Seeded random inputs shared by the oracle suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Piecewise-constant probability rows with noise, `n` rows of width `k`.
pub fn segmented_rows<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(n);
    let mut class = rng.random_range(0..k);
    for _ in 0..n {
        if rng.random::<f64>() < 0.15 {
            class = rng.random_range(0..k);
        }
        let mut row: Vec<f64> = (0..k)
            .map(|c| if c == class { 3.0 } else { 0.0 } + rng.random::<f64>())
            .map(f64::exp)
            .collect();
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
        rows.push(row);
    }
    rows
}

/// Raw event triples `(class or None for excluded, start, end)` on a coarse
/// time grid so that ties and overlaps occur. Not sorted.
pub fn events<R: Rng>(rng: &mut R, m: usize, k: usize) -> Vec<(Option<usize>, f64, f64)> {
    let mut t = rng.random_range(0..4) as f64 * 0.5;
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        let class = if rng.random::<f64>() < 0.05 {
            None
        } else if rng.random::<f64>() < 0.3 {
            // bias toward a few classes so runs form
            Some(rng.random_range(0..k.min(2)))
        } else {
            Some(rng.random_range(0..k))
        };
        let dur = rng.random_range(0..8) as f64 * 0.25;
        out.push((class, t, t + dur));
        t += rng.random_range(0..6) as f64 * 0.5;
    }
    // shuffle so callers exercise the canonical sort
    for i in (1..out.len()).rev() {
        let j = rng.random_range(0..=i);
        out.swap(i, j);
    }
    out
}
