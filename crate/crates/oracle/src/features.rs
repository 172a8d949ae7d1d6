//! Every engineered feature recomputed from its definition.
//!
//! Input is the raw event list; excluded events are dropped and the rest put
//! in (start, end, class) order here, independently of the library.

use std::collections::BTreeMap;

pub type Event = (Option<usize>, f64, f64);

/// mean, sample std, min, max, median, skew (g1), excess kurtosis (g2), sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub skew: f64,
    pub kurt: f64,
    pub sum: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len();
    if n == 0 {
        return Moments::default();
    }
    let sum: f64 = xs.iter().sum();
    let mean = sum / n as f64;
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if n % 2 == 0 {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    } else {
        s[n / 2]
    };
    let (min, max) = (s[0], s[n - 1]);
    let mut out = Moments {
        mean,
        min,
        max,
        median,
        sum,
        ..Default::default()
    };
    let flat = max - min <= 1e-12 * min.abs().max(max.abs());
    if n < 2 || flat {
        return out;
    }
    let central = |p: i32| xs.iter().map(|x| (x - mean).powi(p)).sum::<f64>() / n as f64;
    let m2 = central(2);
    out.std = (m2 * n as f64 / (n - 1) as f64).sqrt();
    if n >= 3 {
        out.skew = central(3) / m2.powf(1.5);
        out.kurt = central(4) / (m2 * m2) - 3.0;
    }
    out
}

/// Feature name to value for one sequence.
pub fn reference_features(events: &[Event], codes: &[&str], lambda: f64) -> BTreeMap<String, f64> {
    let k = codes.len();
    let mut ev: Vec<(usize, f64, f64)> = events
        .iter()
        .filter_map(|&(c, s, e)| c.map(|c| (c, s, e)))
        .collect();
    ev.sort_by(|x, y| {
        x.1.partial_cmp(&y.1)
            .unwrap()
            .then(x.2.partial_cmp(&y.2).unwrap())
            .then(x.0.cmp(&y.0))
    });
    let m = ev.len();
    let labels: Vec<usize> = ev.iter().map(|e| e.0).collect();
    let mut f = BTreeMap::new();
    let mut put = |name: String, v: f64| {
        assert!(f.insert(name, v).is_none(), "duplicate name");
    };

    // frequency, decay, temporal, structure need m >= 1; callers only pass
    // non-empty sequences here.
    assert!(m >= 1);
    let t_last = ev[m - 1].1;
    let mut raw_total = 0.0;
    let mut raw = vec![0.0; k];
    for e in &ev {
        raw[e.0] += (-lambda * (t_last - e.1)).exp();
        raw_total += (-lambda * (t_last - e.1)).exp();
    }
    for g in 0..k {
        let count = labels.iter().filter(|&&l| l == g).count();
        put(format!("freq_{}", codes[g]), count as f64 / m as f64);
        put(format!("decay_{}", codes[g]), raw[g] / raw_total);
    }

    let span = ev[m - 1].2 - ev[0].1;
    put("total_span".into(), span);
    put("gesture_rate".into(), if span == 0.0 { 0.0 } else { m as f64 / span });
    for g in 0..k {
        let last = ev.iter().rev().find(|e| e.0 == g);
        put(
            format!("time_since_last_{}", codes[g]),
            last.map_or(-1.0, |e| t_last - e.1),
        );
    }

    let present: Vec<usize> = (0..k).filter(|g| labels.contains(g)).collect();
    put("unique_count".into(), present.len() as f64);
    put(
        "change_count".into(),
        (1..m).filter(|&i| labels[i] != labels[i - 1]).count() as f64,
    );
    let mut h = 0.0;
    for &g in &present {
        let p = labels.iter().filter(|&&l| l == g).count() as f64 / m as f64;
        h -= p * p.ln() / 2f64.ln();
    }
    put("entropy".into(), h);

    for n in [2usize, 3] {
        let windows = if m >= n { m - n + 1 } else { 0 };
        for idx in 0..k.pow(n as u32) {
            let mut gram = vec![0; n];
            let mut rest = idx;
            for slot in (0..n).rev() {
                gram[slot] = rest % k;
                rest /= k;
            }
            let count = (0..windows).filter(|&s| labels[s..s + n] == gram[..]).count();
            let name = format!(
                "{n}gram_{}",
                gram.iter().map(|&g| codes[g]).collect::<Vec<_>>().join("_")
            );
            put(name, if windows == 0 { 0.0 } else { count as f64 / windows as f64 });
        }
    }

    for a in 0..k {
        let out_count = (0..m.saturating_sub(1)).filter(|&i| labels[i] == a).count();
        for b in 0..k {
            let pair = (0..m.saturating_sub(1))
                .filter(|&i| labels[i] == a && labels[i + 1] == b)
                .count();
            let v = if out_count == 0 { 0.0 } else { pair as f64 / out_count as f64 };
            put(format!("trans_{}_{}", codes[a], codes[b]), v);
        }
    }

    let dwell_names = ["mean", "std", "min", "max", "median", "skew", "kurt"];
    let dwell_values = |s: Moments| [s.mean, s.std, s.min, s.max, s.median, s.skew, s.kurt];
    let dwells: Vec<f64> = (1..m).map(|i| ev[i].1 - ev[i - 1].1).collect();
    for (name, v) in dwell_names.iter().zip(dwell_values(moments(&dwells))) {
        put(format!("dwell_{name}"), v);
    }
    for g in 0..k {
        let before: Vec<f64> = (1..m).filter(|&i| labels[i] == g).map(|i| ev[i].1 - ev[i - 1].1).collect();
        for (name, v) in dwell_names.iter().zip(dwell_values(moments(&before))) {
            put(format!("dwell_before_{name}_{}", codes[g]), v);
        }
    }

    let dur_names = ["mean", "std", "skew", "kurt", "sum"];
    let dur_values = |s: Moments| [s.mean, s.std, s.skew, s.kurt, s.sum];
    let durations: Vec<f64> = ev.iter().map(|e| e.2 - e.1).collect();
    for (name, v) in dur_names.iter().zip(dur_values(moments(&durations))) {
        put(format!("duration_{name}"), v);
    }
    for g in 0..k {
        let d: Vec<f64> = ev.iter().filter(|e| e.0 == g).map(|e| e.2 - e.1).collect();
        for (name, v) in dur_names.iter().zip(dur_values(moments(&d))) {
            put(format!("dur_{name}_{}", codes[g]), v);
        }
    }

    // run-length encode
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for &l in &labels {
        match runs.last_mut() {
            Some((c, len)) if *c == l => *len += 1,
            _ => runs.push((l, 1)),
        }
    }
    for g in 0..k {
        let lens: Vec<usize> = runs.iter().filter(|r| r.0 == g).map(|r| r.1).collect();
        put(
            format!("max_run_{}", codes[g]),
            lens.iter().copied().max().unwrap_or(0) as f64,
        );
        put(
            format!("avg_run_{}", codes[g]),
            if lens.is_empty() {
                0.0
            } else {
                lens.iter().sum::<usize>() as f64 / lens.len() as f64
            },
        );
    }
    f
}
