use serde::{Deserialize, Serialize};

use super::special::{incomplete_beta_pair, student_t_two_tailed};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestKind {
    /// Pooled variance, `df = n_a + n_b - 2`.
    #[default]
    Student,
    /// Unequal variances, Welch-Satterthwaite degrees of freedom.
    Welch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    /// Two-tailed.
    pub p: f64,
    pub df: f64,
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased (n-1) variance.
pub(crate) fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn check_groups(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::validation(format!(
            "two-sample statistics need at least 2 values per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::validation("non-finite sample value"));
    }
    Ok(())
}

fn pooled_variance(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    ((na - 1.0) * variance(a) + (nb - 1.0) * variance(b)) / (na + nb - 2.0)
}

/// Two-tailed two-sample t-test of `mean(a) - mean(b)`.
///
/// With zero variance in both groups the test is only defined when the means
/// coincide (`t = 0`, `p = 1`).
pub fn t_test(a: &[f64], b: &[f64], kind: TTestKind) -> Result<TTest> {
    check_groups(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let diff = mean(a) - mean(b);
    let (se2, df) = match kind {
        TTestKind::Student => {
            let df = na + nb - 2.0;
            (pooled_variance(a, b) * (1.0 / na + 1.0 / nb), df)
        }
        TTestKind::Welch => {
            let (va, vb) = (variance(a) / na, variance(b) / nb);
            let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
            (va + vb, df)
        }
    };
    if se2 <= 0.0 {
        return if diff == 0.0 {
            Ok(TTest {
                t: 0.0,
                p: 1.0,
                df: na + nb - 2.0,
            })
        } else {
            Err(Error::DegenerateVariance(format!(
                "both groups are constant with different means ({diff})"
            )))
        };
    }
    let t = diff / se2.sqrt();
    Ok(TTest {
        t,
        p: student_t_two_tailed(t, df),
        df,
    })
}

/// Student's pooled-variance t-test.
pub fn t_test_two_sample(a: &[f64], b: &[f64]) -> Result<TTest> {
    t_test(a, b, TTestKind::Student)
}

/// Cohen's d with pooled standard deviation, positive when the good-outcome
/// group has the larger mean.
pub fn cohens_d(poor: &[f64], good: &[f64]) -> Result<f64> {
    check_groups(poor, good)?;
    let sd = pooled_variance(poor, good).sqrt();
    if sd.is_nan() || sd <= 0.0 {
        return Err(Error::DegenerateVariance("pooled standard deviation is zero".into()));
    }
    Ok((mean(good) - mean(poor)) / sd)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    /// Two-tailed, from `t = r * sqrt((n-2) / (1-r^2))`.
    pub p: f64,
}

/// Sample Pearson correlation.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::validation(format!("{} x values, {} y values", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::validation("correlation needs at least 3 pairs"));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::DegenerateVariance("correlation of a constant vector".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (x.len() - 2) as f64;
    let r2 = r * r;
    // P(|T| >= |t|) = I_{1-r^2}(df/2, 1/2)
    let p = if r2 >= 1.0 {
        0.0
    } else {
        incomplete_beta_pair(0.5 * df, 0.5, 1.0 - r2, r2).clamp(0.0, 1.0)
    };
    Ok(Correlation { r, p })
}
