mod common;

use ghc_core::census::*;
use ghc_core::marking::{certified, fixture_fuchsian, fixture_single, s2};
use ghc_core::word::{necklace_canonical, Word};
use proptest::prelude::*;

fn matches_naive(m: &ghc_core::marking::CertifiedMarking, t: f64) {
    let store = build_census(m, t, &CensusOptions::default()).unwrap();
    let mut fast: Vec<_> = store.records.iter().map(|r| (r.necklace.letters().to_vec(), r.length, r.holonomy)).collect();
    fast.sort_by(|a, b| a.0.cmp(&b.0));
    let naive = common::naive_census(m, t);
    assert_eq!(fast.len(), naive.len());
    for (f, n) in fast.iter().zip(&naive) {
        assert_eq!(f.0, n.0);
        assert!((f.1 - n.1).abs() < 1e-9, "length of {:?}", f.0);
        assert!(ghc_core::mobius::angle_distance(f.2, n.2) < 1e-9, "holonomy of {:?}", f.0);
    }
}

#[test]
fn s2_census_matches_naive_enumerator_at_t6() {
    matches_naive(&s2(), 6.0);
}

#[test]
fn other_fixtures_match_naive_enumerator() {
    matches_naive(&certified(fixture_fuchsian()).unwrap(), 7.0);
    matches_naive(&certified(fixture_single()).unwrap(), 9.0);
}

#[test]
fn single_generator_census_has_two_orientations() {
    let m = certified(fixture_single()).unwrap();
    let store = build_census(&m, 20.0, &CensusOptions::default()).unwrap();
    assert_eq!(store.len(), 2);
}

#[test]
fn grid_counts_on_s2() {
    let store = build_census(&s2(), 3.0, &CensusOptions::default()).unwrap();
    assert_eq!(census_counts(&store, &[2.7, 3.0]).unwrap(), vec![2, 4]);
    assert!(matches!(store.count_up_to(3.5), Err(CensusError::GridExceedsStore(..))));
}

#[test]
fn shards_merge_to_the_full_census() {
    let m = s2();
    let opts = CensusOptions::default();
    let full = build_census(&m, 12.0, &opts).unwrap();
    let mut merged: Option<CensusStore> = None;
    for i in 0..3 {
        let part = build_census_units(&m, 12.0, &opts, &shard_units(2, i, 3)).unwrap();
        merged = Some(match merged {
            None => part,
            Some(acc) => acc.merge(part).unwrap(),
        });
    }
    let merged = merged.unwrap();
    assert_eq!(merged.records, full.records);
    assert_eq!(merged.to_bytes(), full.to_bytes());
    // merging a store with itself is idempotent
    assert_eq!(full.clone().merge(full.clone()).unwrap().records, full.records);
}

#[test]
fn store_file_round_trip_and_rejections() {
    let m = s2();
    let store = build_census(&m, 10.0, &CensusOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s2.ghc");
    let mut f = std::fs::File::create(&path).unwrap();
    store.write_to(&mut f).unwrap();
    drop(f);
    let back = CensusStore::read_from(&mut std::fs::File::open(&path).unwrap(), m.marking()).unwrap();
    assert_eq!(back, store);

    let bytes = store.to_bytes();
    assert!(CensusStore::from_bytes(&bytes[..bytes.len() - 3], m.marking()).is_err());
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(CensusStore::from_bytes(&extra, m.marking()).is_err());
    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(CensusStore::from_bytes(&bad_magic, m.marking()).is_err());

    let other = certified(fixture_fuchsian()).unwrap();
    assert!(matches!(
        CensusStore::from_bytes(&bytes, other.marking()),
        Err(CensusError::MarkingMismatch { .. })
    ));
    let fstore = build_census(&other, 5.0, &CensusOptions::default()).unwrap();
    assert!(matches!(store.merge(fstore), Err(CensusError::MarkingMismatch { .. })));
}

#[test]
fn word_cap_below_the_needed_length_is_reported() {
    let m = s2();
    let opts = CensusOptions { max_word_len: 4 };
    assert!(matches!(build_census(&m, 12.0, &opts), Err(CensusError::BoundUnreachable { .. })));
}

#[test]
fn census_is_deterministic() {
    let m = s2();
    let a = build_census(&m, 14.0, &CensusOptions::default()).unwrap();
    let b = build_census(&m, 14.0, &CensusOptions::default()).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
}

fn s2_store() -> &'static CensusStore {
    use std::sync::OnceLock;
    static STORE: OnceLock<CensusStore> = OnceLock::new();
    STORE.get_or_init(|| build_census(&s2(), 16.0, &CensusOptions::default()).unwrap())
}

#[test]
fn records_are_sorted_primitive_canonical_and_consistent() {
    let m = s2();
    let store = s2_store();
    assert!(store.records.windows(2).all(|w| w[0].length <= w[1].length));
    let mut seen = std::collections::HashSet::new();
    for r in &store.records {
        assert!(r.necklace.is_primitive());
        assert!(common::period_agrees(r.necklace.letters()));
        assert_eq!(necklace_canonical(&r.necklace.word()).unwrap(), r.necklace);
        assert!(seen.insert(r.necklace.clone()));
        let g = m.marking().evaluate(&r.necklace.word());
        assert!((g.trace() - r.trace).norm() < 1e-9 * r.trace.norm().max(1.0) || (g.trace() + r.trace).norm() < 1e-9 * r.trace.norm().max(1.0));
        assert!((r.length - 2.0 * r.lambda.norm().ln()).abs() < 1e-9);
        assert!(r.length >= m.displacement_lower_bound(r.necklace.len()) - 1e-9);
    }
}

#[test]
fn inverse_classes_have_equal_length_and_are_both_present() {
    let store = s2_store();
    let set: std::collections::HashMap<_, _> = store.records.iter().map(|r| (r.necklace.clone(), r)).collect();
    for r in &store.records {
        let inv = set.get(&r.necklace.inverse()).expect("inverse class present");
        assert!((inv.length - r.length).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_are_monotone(a in 2.0f64..16.0, b in 2.0f64..16.0) {
        let store = s2_store();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(store.count_up_to(lo).unwrap() <= store.count_up_to(hi).unwrap());
    }

    #[test]
    fn smaller_census_is_a_prefix(t in 3.0f64..12.0) {
        let small = build_census(&s2(), t, &CensusOptions::default()).unwrap();
        prop_assert_eq!(&small.records[..], s2_store().up_to(t));
    }

    #[test]
    fn rotations_share_a_necklace(letters in proptest::collection::vec(0u8..4, 1..10), r in 0usize..10) {
        let w = Word::new(&letters);
        if w.is_cyclically_reduced() && !w.is_empty() {
            let s = w.letters();
            let k = r % s.len();
            let rot = Word::new(&[&s[k..], &s[..k]].concat());
            prop_assert_eq!(necklace_canonical(&w).unwrap(), necklace_canonical(&rot).unwrap());
        }
    }
}
