use gestureflow::gesture::{
    frame_labels_from_sequence, FrameProbabilityStream, GestureAlphabet, GestureSequence,
};
use gestureflow::metrics::{frame_level_auc, roc_auc, video_level_auc};
use gestureflow_oracle::auc::pairwise_auc;
use gestureflow_oracle::random::rng;
use proptest::prelude::*;
use rand::Rng;

fn instance<R: Rng>(r: &mut R) -> (Vec<f64>, Vec<bool>) {
    let n = r.random_range(2..300);
    let levels = r.random_range(1..20);
    let mut labels: Vec<bool> = (0..n).map(|_| r.random::<bool>()).collect();
    labels[0] = true;
    labels[1] = false;
    let scores = (0..n).map(|_| r.random_range(0..levels) as f64 / levels as f64).collect();
    (scores, labels)
}

#[test]
fn sort_based_equals_pairwise_with_ties() {
    let mut r = rng(500);
    for i in 0..500 {
        let (s, l) = instance(&mut r);
        assert_eq!(roc_auc(&s, &l).unwrap(), pairwise_auc(&s, &l), "instance {i}");
    }
}

fn truth() -> GestureSequence {
    GestureSequence::from_codes(
        "v",
        GestureAlphabet::new(["p", "s", "g"]).unwrap(),
        &[("p", 0.0, 1.0), ("s", 1.0, 2.5), ("g", 2.5, 3.0), ("p", 3.0, 4.0)],
    )
    .unwrap()
}

fn stream(rows: Vec<Vec<f64>>) -> FrameProbabilityStream {
    FrameProbabilityStream::new("v", GestureAlphabet::new(["p", "s", "g"]).unwrap(), 0.0, 0.1, rows).unwrap()
}

#[test]
fn perfect_and_uniform_streams() {
    let seq = truth();
    let labels = frame_labels_from_sequence(&seq, 0.1, 0.0, 40);
    let one_hot = labels
        .iter()
        .map(|l| (0..3).map(|c| if Some(c) == *l { 1.0 } else { 0.0 }).collect())
        .collect();
    let report = frame_level_auc(&stream(one_hot), &seq).unwrap();
    assert!(report.present().all(|c| c.auc == Some(1.0)));
    assert_eq!(report.present().count(), 3);
    assert_eq!(video_level_auc(&report).unwrap(), 1.0);

    let uniform = vec![vec![1.0 / 3.0; 3]; 40];
    let report = frame_level_auc(&stream(uniform), &seq).unwrap();
    assert!(report.present().all(|c| c.auc == Some(0.5)));
    assert_eq!(video_level_auc(&report).unwrap(), 0.5);
}

#[test]
fn random_stream_matches_pairwise_per_class() {
    let seq = truth();
    let mut r = rng(7);
    let rows: Vec<Vec<f64>> = (0..40)
        .map(|_| {
            let raw: Vec<f64> = (0..3).map(|_| r.random_range(1..6) as f64).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|v| v / s).collect()
        })
        .collect();
    let labels = frame_labels_from_sequence(&seq, 0.1, 0.0, 40);
    let report = frame_level_auc(&stream(rows.clone()), &seq).unwrap();
    let mut sum = 0.0;
    for (c, class) in report.per_class.iter().enumerate() {
        let scores: Vec<f64> = rows.iter().map(|row| row[c]).collect();
        let pos: Vec<bool> = labels.iter().map(|l| *l == Some(c)).collect();
        let want = pairwise_auc(&scores, &pos);
        assert_eq!(class.auc, Some(want));
        sum += want;
    }
    assert!((video_level_auc(&report).unwrap() - sum / 3.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn negated_scores_complement(seed in any::<u64>()) {
        let (s, l) = instance(&mut rng(seed));
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        prop_assert_eq!(roc_auc(&s, &l).unwrap() + roc_auc(&neg, &l).unwrap(), 1.0);
    }

    #[test]
    fn monotone_transform_invariance(seed in any::<u64>()) {
        let (s, l) = instance(&mut rng(seed));
        let t: Vec<f64> = s.iter().map(|v| (3.0 * v).exp() - 7.0).collect();
        prop_assert_eq!(roc_auc(&s, &l).unwrap(), roc_auc(&t, &l).unwrap());
    }

    #[test]
    fn auc_in_unit_interval(seed in any::<u64>()) {
        let (s, l) = instance(&mut rng(seed));
        let a = roc_auc(&s, &l).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
    }
}
