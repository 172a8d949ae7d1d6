use gestureflow::gesture::Outcome;
use gestureflow::matrix::{FeatureMatrix, LabeledMatrix};
use gestureflow::stats::special::{incomplete_beta_pair, regularized_incomplete_beta};
use gestureflow::stats::{cohens_d, concordance, pearson_r, rank_features, t_test_two_sample, t_test, TTestKind};
use gestureflow_oracle::random::rng;
use gestureflow_oracle::stats::{close, reference};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};

#[test]
fn agrees_with_high_precision_reference() {
    let reference = reference();
    assert_eq!(reference.cases.len(), 100);
    for (i, c) in reference.cases.iter().enumerate() {
        let t = t_test_two_sample(&c.a, &c.b).unwrap();
        assert!(close(t.t, c.t, 1e-8), "case {i} t: {} vs {}", t.t, c.t);
        assert!(close(t.p, c.p, 1e-8), "case {i} p: {} vs {}", t.p, c.p);
        let d = cohens_d(&c.a, &c.b).unwrap();
        assert!(close(d, c.d, 1e-8), "case {i} d: {d} vs {}", c.d);
        let r = pearson_r(&c.x, &c.y).unwrap();
        assert!(close(r.r, c.r, 1e-8), "case {i} r: {} vs {}", r.r, c.r);
        assert!(close(r.p, c.r_p, 1e-8), "case {i} r p: {} vs {}", r.p, c.r_p);
    }
}

#[test]
fn small_fixture() {
    let reference = reference().fixture_123_345;
    let t = t_test_two_sample(&[1.0, 2.0, 3.0], &[3.0, 4.0, 5.0]).unwrap();
    assert!((t.t - -2.449490).abs() < 1e-6);
    assert!((t.t - reference.t).abs() < 1e-12);
    assert!((t.p - 0.0705).abs() < 1e-3);
    assert!(close(t.p, reference.p, 1e-10));
    assert_eq!(cohens_d(&[1.0, 2.0, 3.0], &[3.0, 4.0, 5.0]).unwrap(), 2.0);
}

#[test]
fn incomplete_beta_reflection() {
    let shapes = [0.1, 0.5, 1.0, 2.5, 7.0, 30.0, 150.0];
    for &a in &shapes {
        for &b in &shapes {
            for i in 0..=40 {
                let x = i as f64 / 40.0;
                let y = 1.0 - x;
                let sum = incomplete_beta_pair(a, b, x, y) + incomplete_beta_pair(b, a, y, x);
                assert!((sum - 1.0).abs() <= 1e-12, "a={a} b={b} x={x}: {sum}");
                let plain = regularized_incomplete_beta(x, a, b) + regularized_incomplete_beta(1.0 - x, b, a);
                assert!((plain - 1.0).abs() <= 1e-12, "a={a} b={b} x={x}: {plain}");
            }
        }
    }
}

fn samples() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-100.0f64..100.0, 2..40),
        prop::collection::vec(-100.0f64..100.0, 2..40),
    )
}

proptest! {
    #[test]
    fn swapping_groups_negates_t((a, b) in samples()) {
        let ab = t_test_two_sample(&a, &b).unwrap();
        let ba = t_test_two_sample(&b, &a).unwrap();
        prop_assert_eq!(ab.t, -ba.t);
        prop_assert_eq!(ab.p, ba.p);
        prop_assert_eq!(cohens_d(&a, &b).unwrap(), -cohens_d(&b, &a).unwrap());
    }

    #[test]
    fn affine_invariance((a, b) in samples(), alpha in 0.01f64..100.0, beta in -50.0f64..50.0) {
        let f = |xs: &[f64]| xs.iter().map(|x| alpha * x + beta).collect::<Vec<_>>();
        let (fa, fb) = (f(&a), f(&b));
        let before = t_test_two_sample(&a, &b).unwrap();
        let after = t_test_two_sample(&fa, &fb).unwrap();
        prop_assert!(close(after.t, before.t, 1e-12), "{} {}", after.t, before.t);
        prop_assert!(close(after.p, before.p, 1e-12), "{} {}", after.p, before.p);
        prop_assert!(close(cohens_d(&fa, &fb).unwrap(), cohens_d(&a, &b).unwrap(), 1e-12));
    }

    #[test]
    fn welch_equals_student_for_equal_sizes_and_variances(a in prop::collection::vec(-10.0f64..10.0, 3..20)) {
        let b: Vec<f64> = a.iter().map(|x| x + 1.5).collect();
        let s = t_test(&a, &b, TTestKind::Student).unwrap();
        let w = t_test(&a, &b, TTestKind::Welch).unwrap();
        prop_assert!(close(s.t, w.t, 1e-12));
        prop_assert!(close(s.p, w.p, 1e-10));
    }
}

/// Balanced cohort matrix with planted group shifts per feature.
fn planted(n: usize, shifts: &[f64], seed: u64) -> LabeledMatrix {
    let mut r = rng(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let p = shifts.len();
    let outcomes: Vec<Outcome> = (0..n).map(|i| if i % 2 == 0 { Outcome::Poor } else { Outcome::Good }).collect();
    let mut data = Vec::with_capacity(n * p);
    for o in &outcomes {
        for &s in shifts {
            let shift = if *o == Outcome::Good { s } else { 0.0 };
            data.push(shift + normal.sample(&mut r));
        }
    }
    let ids = (0..n).map(|i| format!("c{i:04}")).collect();
    let names = (0..p).map(|j| format!("f{j:03}")).collect();
    LabeledMatrix::from_parts(FeatureMatrix::new(ids, names, data).unwrap(), outcomes).unwrap()
}

#[test]
fn ranking_matches_brute_force_sort() {
    let shifts: Vec<f64> = (0..60).map(|j| if j % 7 == 0 { -0.8 + j as f64 * 0.02 } else { 0.0 }).collect();
    let data = planted(80, &shifts, 3);
    let ranked = rank_features(&data, TTestKind::Student);
    // oracle: score every column on its own and sort by (p, -|d|, name)
    let mut oracle: Vec<(f64, f64, String)> = (0..60)
        .map(|j| {
            let (poor, good) = data.split(j);
            let t = t_test_two_sample(&good, &poor).unwrap();
            (t.p, cohens_d(&poor, &good).unwrap(), data.matrix().names()[j].clone())
        })
        .collect();
    oracle.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.abs().total_cmp(&a.1.abs())).then(a.2.cmp(&b.2)));
    let got: Vec<&str> = ranked.iter().map(|f| f.name.as_str()).collect();
    let want: Vec<&str> = oracle.iter().map(|o| o.2.as_str()).collect();
    assert_eq!(got, want);
    for f in &ranked {
        let j = data.matrix().feature_index(&f.name).unwrap();
        if shifts[j] != 0.0 && shifts[j].abs() > 0.5 {
            assert_eq!(f.d.signum(), shifts[j].signum(), "{}", f.name);
        }
    }
}

#[test]
fn self_concordance() {
    let shifts: Vec<f64> = (0..120).map(|j| (j % 9) as f64 * 0.1 - 0.4).collect();
    let data = planted(100, &shifts, 4);
    let report = concordance(&data, &data, 50, TTestKind::Student).unwrap();
    assert_eq!(report.overlap_count(), 50);
    assert_eq!(report.delta_d_avg, Some(0.0));
    assert!((report.pearson_r_of_d.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(report.sign_agreement, 50);
}

#[test]
fn disjoint_signals_give_empty_overlap() {
    let mut shifts_a = vec![0.0; 40];
    let mut shifts_b = vec![0.0; 40];
    for j in 0..5 {
        shifts_a[j] = 3.0;
        shifts_b[20 + j] = 3.0;
    }
    let a = planted(60, &shifts_a, 5);
    let b = planted(60, &shifts_b, 6);
    let report = concordance(&a, &b, 5, TTestKind::Student).unwrap();
    assert_eq!(report.overlap_count(), 0);
    assert_eq!(report.pearson_r_of_d, None);
    assert_eq!(report.delta_d_avg, None);
}

#[test]
fn ranking_is_a_permutation() {
    let mut r = rng(8);
    let shifts: Vec<f64> = (0..30).map(|_| r.random_range(-1.0..1.0)).collect();
    let data = planted(40, &shifts, 9);
    let mut names: Vec<String> = rank_features(&data, TTestKind::Welch).into_iter().map(|f| f.name).collect();
    names.sort();
    assert_eq!(names, data.matrix().names());
}
