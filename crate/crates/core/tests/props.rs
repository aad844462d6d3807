//! Property tests: structural invariants under arbitrary inputs, checked
//! against plain-library models.

use proptest::prelude::*;
use randlab_core::bloom;
use randlab_core::cuckoo::CuckooTable;
use randlab_core::hashing::{self, HashFunctionHandle};
use randlab_core::rng::{Method, RandomSource};
use randlab_core::skiplist::SkipList;
use randlab_core::treap::Treap;

proptest! {
    #[test]
    fn uniform_below_stays_in_range(seed: u64, n in 1u64..=1_000_000, rejection: bool) {
        let method = if rejection { Method::Rejection } else { Method::RangeCoding };
        let mut src = RandomSource::new(seed);
        for _ in 0..50 {
            prop_assert!(src.uniform_below(n, method) < n);
        }
    }

    #[test]
    fn same_seed_same_stream(seed: u64, widths in proptest::collection::vec(1u32..=64, 1..40)) {
        let mut a = RandomSource::new(seed);
        let mut b = RandomSource::new(seed);
        for &w in &widths {
            prop_assert_eq!(a.next_bits(w), b.next_bits(w));
        }
        prop_assert_eq!(a.bits_consumed(), b.bits_consumed());
    }

    #[test]
    fn treap_matches_ordered_set_model(
        seed: u64,
        ops in proptest::collection::vec((any::<bool>(), 0u32..64), 1..200),
    ) {
        let mut src = RandomSource::new(seed);
        let mut treap = Treap::new();
        let mut model = std::collections::BTreeSet::new();
        for (is_insert, key) in ops {
            if is_insert {
                let expected = model.insert(key);
                prop_assert_eq!(treap.insert(key, &mut src).is_ok(), expected);
            } else {
                let expected = model.remove(&key);
                prop_assert_eq!(treap.delete(&key).is_ok(), expected);
            }
            prop_assert!(treap.validate().is_ok());
        }
        let keys: Vec<u32> = treap.keys().into_iter().copied().collect();
        let expected: Vec<u32> = model.into_iter().collect();
        prop_assert_eq!(keys, expected);
    }

    #[test]
    fn skiplist_matches_ordered_set_model(
        seed: u64,
        p in 0.0f64..0.9,
        ops in proptest::collection::vec((any::<bool>(), 0u32..64), 1..200),
    ) {
        let mut src = RandomSource::new(seed);
        let mut list = SkipList::new(p, 256).unwrap();
        let mut model = std::collections::BTreeSet::new();
        for (is_insert, key) in ops {
            if is_insert {
                let expected = model.insert(key);
                prop_assert_eq!(list.insert(key, &mut src).is_ok(), expected);
            } else {
                let expected = model.remove(&key);
                prop_assert_eq!(list.delete(&key).is_ok(), expected);
            }
            prop_assert!(list.validate().is_ok());
        }
        let keys: Vec<u32> = list.keys_and_heights().into_iter().map(|(k, _)| *k).collect();
        let expected: Vec<u32> = model.into_iter().collect();
        prop_assert_eq!(keys, expected);
    }

    #[test]
    fn cuckoo_matches_map_model(
        seed: u64,
        ops in proptest::collection::vec((any::<bool>(), 0u64..48), 1..150),
    ) {
        let mut src = RandomSource::new(seed);
        let mut table = CuckooTable::new(&mut src, 256).unwrap();
        let mut model = std::collections::HashMap::new();
        for (is_insert, key) in ops {
            if is_insert {
                match table.insert(key, key * 3, &mut src) {
                    Ok(_) => {
                        prop_assert!(model.insert(key, key * 3).is_none());
                    }
                    Err(_) => prop_assert!(model.contains_key(&key)),
                }
            } else {
                prop_assert_eq!(table.delete(key).ok(), model.remove(&key));
            }
            prop_assert!(table.validate().is_ok());
        }
        for (key, value) in model {
            prop_assert_eq!(table.lookup(key).0, Some(&value));
        }
    }

    #[test]
    fn bloom_never_forgets_members(seed: u64, keys in proptest::collection::vec(0u64..1_000_000, 1..300)) {
        let mut src = RandomSource::new(seed);
        let params = bloom::plan(keys.len() as u64, 0.05).unwrap();
        let mut filter = bloom::BloomFilter::new(&mut src, params, 1 << 20).unwrap();
        for &key in &keys {
            filter.insert(key);
        }
        for &key in &keys {
            prop_assert!(filter.query(key));
        }
    }

    #[test]
    fn hash_handles_round_trip_bytes(seed: u64, family in 0u8..3) {
        let mut src = RandomSource::new(seed);
        let handle = match family {
            0 => hashing::sample_mod_p(&mut src, 1 << 30, 1 << 10).unwrap(),
            1 => hashing::sample_multiply_shift(&mut src, 40, 9).unwrap(),
            _ => hashing::sample_tabulation(&mut src, 4, 8, 12).unwrap(),
        };
        let restored = HashFunctionHandle::from_bytes(&handle.to_bytes()).unwrap();
        prop_assert_eq!(&handle, &restored);
        let mut probe = RandomSource::new(seed ^ 0xDEAD);
        for _ in 0..64 {
            let x = probe.next_bits(30);
            prop_assert_eq!(handle.eval(x), restored.eval(x));
        }
    }
}
