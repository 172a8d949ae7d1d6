use gestureflow::features::{
    assemble_feature_vector, decay_features, duration_features, schema_len, FeatureConfig,
    FeatureSchema,
};
use gestureflow::gesture::{Gesture, GestureAlphabet, GestureEvent, GestureSequence};
use gestureflow_oracle::features::{reference_features, Event};
use gestureflow_oracle::random::{events, rng};
use proptest::prelude::*;
use rand::Rng;

fn build(alphabet: &GestureAlphabet, evs: &[Event]) -> GestureSequence {
    let events = evs
        .iter()
        .map(|&(c, s, e)| {
            let g = c.map_or(Gesture::Excluded, Gesture::Class);
            GestureEvent::new(g, s, e)
        })
        .collect();
    GestureSequence::new("case", alphabet.clone(), events).unwrap()
}

fn has_class(evs: &[Event]) -> bool {
    evs.iter().any(|e| e.0.is_some())
}

#[test]
fn every_family_matches_brute_force() {
    let mut r = rng(2024);
    let alphabets = [
        GestureAlphabet::default(),
        GestureAlphabet::new(["p", "s", "g"]).unwrap(),
    ];
    let mut checked = 0;
    while checked < 100 {
        let alphabet = &alphabets[checked % 2];
        let m = r.random_range(1..=500);
        let evs = events(&mut r, m, alphabet.len());
        if !has_class(&evs) {
            continue;
        }
        let lambda = [0.01, 0.0, 0.3][checked % 3];
        let schema = FeatureSchema::new(alphabet.clone(), FeatureConfig { decay_lambda: lambda }).unwrap();
        let got = assemble_feature_vector(&build(alphabet, &evs), &schema).unwrap();
        let codes: Vec<&str> = alphabet.codes().iter().map(String::as_str).collect();
        let want = reference_features(&evs, &codes, lambda);
        assert_eq!(got.names().len(), want.len());
        for (name, v) in got.iter() {
            let w = want[name];
            assert!((v - w).abs() <= 1e-9, "seq {checked} {name}: {v} vs {w}");
        }
        checked += 1;
    }
}

#[test]
fn schema_length_by_enumeration() {
    for k in 2..=10 {
        let codes: Vec<String> = (0..k).map(|i| format!("g{i}")).collect();
        let schema = FeatureSchema::new(GestureAlphabet::new(codes).unwrap(), FeatureConfig::default()).unwrap();
        let mut names = schema.names().to_vec();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), k * k * k + 2 * k * k + 17 * k + 17);
        assert_eq!(schema_len(k), names.len());
    }
    assert_eq!(FeatureSchema::default().len(), 1387);
}

#[test]
fn half_life_decay() {
    let alphabet = GestureAlphabet::default();
    let seq = GestureSequence::from_codes("c", alphabet, &[("p", 0.0, 1.0), ("s", 10.0, 11.0)]).unwrap();
    let d = decay_features(&seq, std::f64::consts::LN_2 / 10.0).unwrap();
    let get = |n: &str| d.iter().find(|(k, _)| k == n).unwrap().1;
    assert!((get("decay_p") - 1.0 / 3.0).abs() < 1e-15);
    assert!((get("decay_s") - 2.0 / 3.0).abs() < 1e-15);
}

fn sum_of(v: &gestureflow::features::FeatureVector, prefix: &str) -> f64 {
    v.iter().filter(|(n, _)| n.starts_with(prefix)).map(|(_, x)| x).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn normalized_families_sum_to_one(seed in any::<u64>(), m in 1usize..200) {
        let alphabet = GestureAlphabet::default();
        let evs = events(&mut rng(seed), m, 10);
        prop_assume!(has_class(&evs));
        let v = assemble_feature_vector(&build(&alphabet, &evs), &FeatureSchema::default()).unwrap();
        prop_assert!((sum_of(&v, "freq_") - 1.0).abs() <= 1e-12);
        prop_assert!((sum_of(&v, "decay_") - 1.0).abs() <= 1e-12);
        for a in alphabet.codes() {
            let row = sum_of(&v, &format!("trans_{a}_"));
            prop_assert!(row == 0.0 || (row - 1.0).abs() <= 1e-12, "{a}: {row}");
        }
        let per_class: f64 = alphabet.codes().iter().map(|g| v.get(&format!("dur_sum_{g}")).unwrap()).sum();
        prop_assert!((per_class - v.get("duration_sum").unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn time_shift_changes_nothing(seed in any::<u64>(), m in 1usize..120, shift in 0u32..4096) {
        // grid times and an integer shift keep every difference exact
        let alphabet = GestureAlphabet::default();
        let evs = events(&mut rng(seed), m, 10);
        prop_assume!(has_class(&evs));
        let shifted: Vec<Event> = evs.iter().map(|&(c, s, e)| (c, s + shift as f64, e + shift as f64)).collect();
        let schema = FeatureSchema::default();
        let a = assemble_feature_vector(&build(&alphabet, &evs), &schema).unwrap();
        let b = assemble_feature_vector(&build(&alphabet, &shifted), &schema).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn appending_never_shrinks_duration_sum(seed in any::<u64>(), m in 1usize..100, dur in 0.0f64..5.0) {
        let alphabet = GestureAlphabet::default();
        let mut evs = events(&mut rng(seed), m, 10);
        prop_assume!(has_class(&evs));
        let before = duration_features(&build(&alphabet, &evs)).unwrap();
        let last = evs.iter().map(|e| e.1).fold(0.0, f64::max);
        evs.push((Some(3), last + 1.0, last + 1.0 + dur));
        let after = duration_features(&build(&alphabet, &evs)).unwrap();
        let total = |v: &[(String, f64)]| v.iter().find(|(n, _)| n == "duration_sum").unwrap().1;
        prop_assert!(total(&after) >= total(&before));
    }

    #[test]
    fn row_order_does_not_matter(seed in any::<u64>(), m in 1usize..100) {
        let alphabet = GestureAlphabet::default();
        let evs = events(&mut rng(seed), m, 10);
        prop_assume!(has_class(&evs));
        let mut reversed = evs.clone();
        reversed.reverse();
        let schema = FeatureSchema::default();
        let a = assemble_feature_vector(&build(&alphabet, &evs), &schema).unwrap();
        let b = assemble_feature_vector(&build(&alphabet, &reversed).with_case_id("other").unwrap(), &schema).unwrap();
        prop_assert_eq!(a.values(), b.values());
        prop_assert_eq!(a.names(), b.names());
    }
}
