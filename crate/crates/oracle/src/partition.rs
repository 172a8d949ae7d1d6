//! Kernel-cost segmentation by exhaustive search and by plain dynamic
//! programming over a precomputed Gram matrix.

pub struct Gram {
    n: usize,
    /// `prefix[(i) * (n + 1) + j]` = sum of `K[u][v]` for `u < i`, `v < j`.
    prefix: Vec<f64>,
}

impl Gram {
    pub fn new(rows: &[Vec<f64>], gamma: f64) -> Self {
        let n = rows.len();
        let w = n + 1;
        let mut prefix = vec![0.0; w * w];
        for i in 0..n {
            for j in 0..n {
                let d2: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b).powi(2)).sum();
                let k = (-gamma * d2).exp();
                prefix[(i + 1) * w + j + 1] =
                    k + prefix[i * w + j + 1] + prefix[(i + 1) * w + j] - prefix[i * w + j];
            }
        }
        Self { n, prefix }
    }

    fn block(&self, a: usize, b: usize) -> f64 {
        let w = self.n + 1;
        self.prefix[b * w + b] - self.prefix[a * w + b] - self.prefix[b * w + a] + self.prefix[a * w + a]
    }

    /// `(b - a) - sum_{u,v in [a,b)} K[u][v] / (b - a)`, clamped at 0.
    pub fn cost(&self, a: usize, b: usize) -> f64 {
        let len = (b - a) as f64;
        (len - self.block(a, b) / len).max(0.0)
    }

    /// Direct double sum, for short segments where prefix cancellation would
    /// cost precision.
    pub fn cost_direct(rows: &[Vec<f64>], gamma: f64, a: usize, b: usize) -> f64 {
        let len = (b - a) as f64;
        let mut s = 0.0;
        for u in a..b {
            for v in a..b {
                let d2: f64 = rows[u].iter().zip(&rows[v]).map(|(x, y)| (x - y).powi(2)).sum();
                s += (-gamma * d2).exp();
            }
        }
        (len - s / len).max(0.0)
    }
}

/// `sum cost + penalty * (segments - 1)` for segment ends (last = n).
pub fn penalized_cost(rows: &[Vec<f64>], gamma: f64, penalty: f64, ends: &[usize]) -> f64 {
    let mut start = 0;
    let mut total = 0.0;
    for &e in ends {
        total += Gram::cost_direct(rows, gamma, start, e);
        start = e;
    }
    total + penalty * (ends.len().saturating_sub(1)) as f64
}

/// Minimum penalized cost over every partition into segments of at least
/// `min_size` rows, by enumerating all breakpoint subsets. Exponential in n.
pub fn exhaustive(rows: &[Vec<f64>], gamma: f64, penalty: f64, min_size: usize) -> (f64, Vec<usize>) {
    let n = rows.len();
    assert!(n <= 20, "exhaustive search is for tiny inputs");
    let mut best = (f64::INFINITY, vec![n]);
    for mask in 0u32..(1 << n.saturating_sub(1)) {
        let mut ends: Vec<usize> = (1..n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        ends.push(n);
        let mut start = 0;
        let mut ok = true;
        for &e in &ends {
            if e - start < min_size {
                ok = false;
            }
            start = e;
        }
        if !ok && ends.len() > 1 {
            continue;
        }
        let c = penalized_cost(rows, gamma, penalty, &ends);
        if c < best.0 {
            best = (c, ends);
        }
    }
    best
}

/// O(n^2) optimal partitioning without pruning.
pub fn dynamic_program(rows: &[Vec<f64>], gamma: f64, penalty: f64, min_size: usize) -> (f64, Vec<usize>) {
    let n = rows.len();
    let gram = Gram::new(rows, gamma);
    let mut f = vec![f64::INFINITY; n + 1];
    let mut back = vec![0; n + 1];
    f[0] = -penalty;
    for t in min_size..=n {
        for s in 0..=t - min_size {
            if !f[s].is_finite() {
                continue;
            }
            let v = f[s] + gram.cost(s, t) + penalty;
            if v < f[t] {
                f[t] = v;
                back[t] = s;
            }
        }
    }
    if !f[n].is_finite() {
        return (penalized_cost(rows, gamma, penalty, &[n]), vec![n]);
    }
    let mut ends = vec![];
    let mut t = n;
    while t > 0 {
        ends.push(t);
        t = back[t];
    }
    ends.reverse();
    (f[n], ends)
}
