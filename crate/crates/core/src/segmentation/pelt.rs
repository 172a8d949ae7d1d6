use super::cost::{rbf_kernel, Signal};

/// Relative slack in the pruning test, so that rounding in the running kernel
/// sums can only keep a candidate alive, never drop an optimal one.
const PRUNE_SLACK: f64 = 1e-9;

struct Candidate {
    start: usize,
    /// `sum_{u,v in [start, t)} k(y_u, y_v)` for the current end `t`.
    pair_sum: f64,
    /// First end at which this start is known to be dominated.
    expiry: usize,
}

/// Exact penalized segmentation under the kernel cost.
///
/// Minimizes `sum cost(segment) + penalty * (#segments - 1)` over partitions
/// whose segments hold at least `min_size` rows, via the optimal-partitioning
/// recursion `F(t) = min_s F(s) + c(s, t) + penalty`. With `prune` set, a start
/// `s` is discarded once `F(s) + c(s, t) > F(t)`. Because a discarded start may
/// still beat `t` for ends closer than `min_size` to `t`, removal is deferred
/// until `t + min_size`.
///
/// Returns the sorted segment ends: interior breakpoints followed by `n`.
/// An empty signal yields an empty list.
pub fn optimal_partition(
    signal: Signal<'_>,
    gamma: f64,
    penalty: f64,
    min_size: usize,
    prune: bool,
) -> Vec<usize> {
    let n = signal.len();
    if n == 0 {
        return Vec::new();
    }
    let min_size = min_size.max(1);
    if n < 2 * min_size {
        return vec![n];
    }

    let mut best = vec![f64::INFINITY; n + 1];
    let mut prev = vec![0usize; n + 1];
    best[0] = 0.0;
    let mut cands: Vec<Candidate> = Vec::new();
    let mut column = Vec::with_capacity(n);
    let mut costs = Vec::with_capacity(n);

    for t in 1..=n {
        let s_new = t - 1;
        if best[s_new].is_finite() {
            cands.push(Candidate {
                start: s_new,
                pair_sum: 0.0,
                expiry: usize::MAX,
            });
        }
        cands.retain(|c| c.expiry > t);

        // extend every candidate segment by row t-1
        let new_row = signal.row(t - 1);
        let lo = cands.first().map_or(t - 1, |c| c.start);
        column.clear();
        column.extend((lo..t - 1).map(|u| rbf_kernel(signal.row(u), new_row, gamma)));
        // cands are sorted by start; accumulate suffix sums from the newest row
        // backwards so every candidate sees the same summation order
        let mut suffix = 0.0;
        let mut u = t - 1;
        for c in cands.iter_mut().rev() {
            while u > c.start {
                u -= 1;
                suffix += column[u - lo];
            }
            c.pair_sum += 2.0 * suffix + 1.0;
        }

        costs.clear();
        let mut f_t = f64::INFINITY;
        let mut arg = 0;
        for c in &cands {
            let len = (t - c.start) as f64;
            let cost = (len - c.pair_sum / len).max(0.0);
            costs.push(cost);
            if t - c.start < min_size {
                continue;
            }
            let v = best[c.start] + cost + penalty;
            if v < f_t {
                f_t = v;
                arg = c.start;
            }
        }
        // ends in (0, min_size) and (n - min_size, n) cannot be interior breaks
        let reachable = t >= min_size && (t == n || t + min_size <= n);
        if reachable {
            best[t] = f_t;
            prev[t] = arg;
        }

        if prune && best[t].is_finite() {
            let bound = best[t] + PRUNE_SLACK * best[t].abs().max(1.0);
            let expiry = t + min_size;
            for (c, cost) in cands.iter_mut().zip(&costs) {
                if best[c.start] + cost > bound {
                    c.expiry = c.expiry.min(expiry);
                }
            }
        }
    }

    let mut ends = Vec::new();
    let mut t = n;
    while t > 0 {
        ends.push(t);
        t = prev[t];
    }
    ends.reverse();
    ends
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_hot(labels: &[usize], k: usize) -> Vec<f64> {
        let mut out = vec![0.0; labels.len() * k];
        for (i, &l) in labels.iter().enumerate() {
            out[i * k + l] = 1.0;
        }
        out
    }

    #[test]
    fn constant_signal_has_no_breaks() {
        let data = [0.3, 0.7].repeat(20);
        let s = Signal::new(&data, 2);
        assert_eq!(optimal_partition(s, 1.0, 0.5, 2, true), vec![20]);
    }

    #[test]
    fn two_blocks_split_once() {
        let data = one_hot(&[0, 0, 0, 0, 0, 1, 1, 1, 1, 1], 2);
        let s = Signal::new(&data, 2);
        assert_eq!(optimal_partition(s, 0.5, 0.5, 2, true), vec![5, 10]);
        assert_eq!(optimal_partition(s, 0.5, 0.5, 1, false), vec![5, 10]);
    }

    #[test]
    fn zero_penalty_isolates_distinct_rows() {
        let data: Vec<f64> = (0..8).map(|i| i as f64 * 0.37).collect();
        let s = Signal::new(&data, 1);
        assert_eq!(optimal_partition(s, 1.0, 0.0, 1, true), (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn short_signal_is_one_segment() {
        let data = one_hot(&[0, 1, 0], 2);
        let s = Signal::new(&data, 2);
        assert_eq!(optimal_partition(s, 1.0, 0.0, 2, true), vec![3]);
        assert!(optimal_partition(Signal::new(&[], 2), 1.0, 0.0, 2, true).is_empty());
    }

    #[test]
    fn min_size_is_respected() {
        let data = one_hot(&[0, 1, 0, 0, 1, 1, 0, 1], 2);
        let s = Signal::new(&data, 2);
        for m in 1..=4 {
            let ends = optimal_partition(s, 1.0, 0.0, m, true);
            let mut prev = 0;
            for e in ends {
                assert!(e - prev >= m, "segment {prev}..{e} shorter than {m}");
                prev = e;
            }
        }
    }
}
