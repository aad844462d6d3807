//! Dynamic cuckoo hash table: one slot array, two tabulation hash
//! functions, displacement insertion with rehash on failure.
//!
//! Every stored key lives at one of its two hash positions, so lookups read
//! at most two slots. Insertion displaces residents along an eviction chain
//! for at most (element count + 1) hops; exhausting the chain triggers a
//! full rehash with fresh functions. The analysis needs load below 1/2, so
//! the table refuses inserts past its load limit instead of growing.

use crate::hashing::{sample_tabulation, HashFamError, HashFunctionHandle};
use crate::rng::RandomSource;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CuckooError {
    #[error("key already present")]
    DuplicateKey,
    #[error("key not present")]
    MissingKey,
    #[error("insert would exceed the load limit; grow and rebuild instead")]
    CapacityExceeded,
    #[error("slot count must be a power of two, got {0}")]
    NotPowerOfTwo(usize),
    #[error("load limit must be in (0, 0.5), got {0}")]
    InvalidLoadLimit(f64),
    #[error("hash family error: {0}")]
    Family(#[from] HashFamError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CuckooStats {
    pub displacements: u64,
    pub rehashes: u64,
}

#[derive(Debug, Clone)]
pub struct CuckooTable<V> {
    slots: Vec<Option<(u64, V)>>,
    hashes: [HashFunctionHandle; 2],
    load_limit: f64,
    len: usize,
    /// Optional safety valve: force a rehash after this many inserts.
    rehash_period: Option<u64>,
    inserts_since_rehash: u64,
    stats: CuckooStats,
}

const TABULATION_CHARS: u32 = 8;
const TABULATION_CHAR_BITS: u32 = 8;

impl<V: Clone> CuckooTable<V> {
    pub fn new(src: &mut RandomSource, slot_count: usize) -> Result<Self, CuckooError> {
        Self::with_load_limit(src, slot_count, 0.45)
    }

    pub fn with_load_limit(
        src: &mut RandomSource,
        slot_count: usize,
        load_limit: f64,
    ) -> Result<Self, CuckooError> {
        if !slot_count.is_power_of_two() {
            return Err(CuckooError::NotPowerOfTwo(slot_count));
        }
        if !(load_limit > 0.0 && load_limit < 0.5) {
            return Err(CuckooError::InvalidLoadLimit(load_limit));
        }
        let hashes = Self::sample_pair(src, slot_count)?;
        Ok(CuckooTable {
            slots: vec![None; slot_count],
            hashes,
            load_limit,
            len: 0,
            rehash_period: None,
            inserts_since_rehash: 0,
            stats: CuckooStats::default(),
        })
    }

    fn sample_pair(
        src: &mut RandomSource,
        slot_count: usize,
    ) -> Result<[HashFunctionHandle; 2], CuckooError> {
        let m_bits = slot_count.trailing_zeros().max(1);
        let h1 = sample_tabulation(src, TABULATION_CHARS, TABULATION_CHAR_BITS, m_bits)?;
        let h2 = sample_tabulation(src, TABULATION_CHARS, TABULATION_CHAR_BITS, m_bits)?;
        Ok([h1, h2])
    }

    /// Enable the force-rehash-every-`period`-inserts safety valve.
    pub fn set_rehash_period(&mut self, period: Option<u64>) {
        self.rehash_period = period;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn load(&self) -> f64 {
        self.len as f64 / self.slots.len() as f64
    }

    pub fn stats(&self) -> CuckooStats {
        self.stats
    }

    fn positions(&self, key: u64) -> [usize; 2] {
        [
            self.hashes[0].eval(key) as usize,
            self.hashes[1].eval(key) as usize,
        ]
    }

    /// Insert a new key; returns the displacement count for this call.
    pub fn insert(
        &mut self,
        key: u64,
        value: V,
        src: &mut RandomSource,
    ) -> Result<u64, CuckooError> {
        if self.lookup(key).0.is_some() {
            return Err(CuckooError::DuplicateKey);
        }
        if (self.len + 1) as f64 / self.slots.len() as f64 > self.load_limit {
            return Err(CuckooError::CapacityExceeded);
        }
        if let Some(period) = self.rehash_period {
            if self.inserts_since_rehash >= period {
                self.rehash(src)?;
            }
        }
        let mut displacements = 0u64;
        let mut pending = (key, value);
        loop {
            match self.place(pending, &mut displacements) {
                Ok(()) => {
                    self.len += 1;
                    self.inserts_since_rehash += 1;
                    self.stats.displacements += displacements;
                    return Ok(displacements);
                }
                Err(bounced) => {
                    pending = bounced;
                    self.rehash(src)?;
                }
            }
        }
    }

    /// Run the displacement loop; on chain exhaustion hands back the value
    /// left without a nest.
    fn place(&mut self, item: (u64, V), displacements: &mut u64) -> Result<(), (u64, V)> {
        let mut item = item;
        let mut pos = self.positions(item.0)[0];
        // One hop per element that can take part in the chain, plus the
        // newcomer itself.
        for _ in 0..=self.len {
            match &mut self.slots[pos] {
                slot @ None => {
                    *slot = Some(item);
                    return Ok(());
                }
                Some(resident) => {
                    std::mem::swap(resident, &mut item);
                    *displacements += 1;
                    let [first, second] = self.positions(item.0);
                    pos = if pos == first { second } else { first };
                }
            }
        }
        Err(item)
    }

    /// Draw fresh functions and reinsert everything; repeats until a
    /// placement with the new functions succeeds.
    fn rehash(&mut self, src: &mut RandomSource) -> Result<(), CuckooError> {
        let entries: Vec<(u64, V)> = self.slots.iter_mut().filter_map(|s| s.take()).collect();
        'attempt: loop {
            self.stats.rehashes += 1;
            self.hashes = Self::sample_pair(src, self.slots.len())?;
            self.inserts_since_rehash = 0;
            for entry in entries.iter().cloned() {
                let mut displacements = 0u64;
                if self.place(entry, &mut displacements).is_err() {
                    for slot in self.slots.iter_mut() {
                        *slot = None;
                    }
                    continue 'attempt;
                }
                self.stats.displacements += displacements;
            }
            return Ok(());
        }
    }

    /// Inspects exactly the two candidate slots.
    pub fn lookup(&self, key: u64) -> (Option<&V>, u32) {
        let [first, second] = self.positions(key);
        if let Some((stored, value)) = &self.slots[first] {
            if *stored == key {
                return (Some(value), 1);
            }
        }
        if let Some((stored, value)) = &self.slots[second] {
            if *stored == key {
                return (Some(value), 2);
            }
        }
        (None, 2)
    }

    pub fn contains(&self, key: u64) -> bool {
        self.lookup(key).0.is_some()
    }

    /// Clear whichever of the two slots holds the key; nothing else moves.
    pub fn delete(&mut self, key: u64) -> Result<V, CuckooError> {
        for pos in self.positions(key) {
            if matches!(&self.slots[pos], Some((stored, _)) if *stored == key) {
                let (_, value) = self.slots[pos].take().expect("checked above");
                self.len -= 1;
                return Ok(value);
            }
        }
        Err(CuckooError::MissingKey)
    }

    /// Full-scan residency check: every stored key sits at one of its two
    /// positions and the load respects the limit.
    pub fn validate(&self) -> Result<(), String> {
        let mut occupied = 0usize;
        for (idx, slot) in self.slots.iter().enumerate() {
            if let Some((key, _)) = slot {
                occupied += 1;
                if !self.positions(*key).contains(&idx) {
                    return Err(format!("key {key} stored away from both positions"));
                }
            }
        }
        if occupied != self.len {
            return Err(format!("{occupied} occupied slots but len {}", self.len));
        }
        if self.load() > self.load_limit + 1e-12 {
            return Err(format!(
                "load {} above limit {}",
                self.load(),
                self.load_limit
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Method;

    #[test]
    fn construction_checks_parameters() {
        let mut src = RandomSource::new(1);
        assert!(matches!(
            CuckooTable::<u64>::new(&mut src, 1000),
            Err(CuckooError::NotPowerOfTwo(1000))
        ));
        assert!(matches!(
            CuckooTable::<u64>::with_load_limit(&mut src, 1024, 0.5),
            Err(CuckooError::InvalidLoadLimit(_))
        ));
    }

    #[test]
    fn first_insert_lands_at_first_position_with_no_displacements() {
        let mut src = RandomSource::new(2);
        let mut table = CuckooTable::new(&mut src, 1 << 10).unwrap();
        let displacements = table.insert(77, "a", &mut src).unwrap();
        assert_eq!(displacements, 0);
        let pos = table.positions(77)[0];
        assert!(matches!(&table.slots[pos], Some((77, _))));
    }

    #[test]
    fn duplicate_and_missing_errors() {
        let mut src = RandomSource::new(3);
        let mut table = CuckooTable::new(&mut src, 1 << 8).unwrap();
        table.insert(5, 50u64, &mut src).unwrap();
        assert_eq!(
            table.insert(5, 51, &mut src).unwrap_err(),
            CuckooError::DuplicateKey
        );
        assert_eq!(table.delete(6).unwrap_err(), CuckooError::MissingKey);
    }

    #[test]
    fn insert_then_delete_leaves_empty_table() {
        let mut src = RandomSource::new(4);
        let mut table = CuckooTable::new(&mut src, 1 << 8).unwrap();
        table.insert(9, 90u64, &mut src).unwrap();
        assert_eq!(table.delete(9).unwrap(), 90);
        assert!(table.is_empty());
        assert!(table.slots.iter().all(|s| s.is_none()));
    }

    #[test]
    fn lookups_always_probe_at_most_two_slots() {
        let mut src = RandomSource::new(5);
        let mut table = CuckooTable::new(&mut src, 1 << 12).unwrap();
        for key in 0..1500u64 {
            table.insert(key, key, &mut src).unwrap();
        }
        for probe in 0..100_000u64 {
            let (value, probes) = table.lookup(probe);
            assert!(probes <= 2);
            if probe < 1500 {
                assert_eq!(value, Some(&probe));
            } else {
                assert_eq!(value, None);
                assert_eq!(probes, 2);
            }
        }
    }

    #[test]
    fn capacity_limit_is_enforced() {
        let mut src = RandomSource::new(6);
        let mut table = CuckooTable::with_load_limit(&mut src, 64, 0.45).unwrap();
        let capacity = (64.0f64 * 0.45).floor() as u64; // 28 keys
        for key in 0..capacity {
            table.insert(key, key, &mut src).unwrap();
        }
        assert_eq!(
            table.insert(999, 999, &mut src).unwrap_err(),
            CuckooError::CapacityExceeded
        );
        table.validate().unwrap();
    }

    #[test]
    fn fill_run_keeps_displacements_small() {
        for seed in [7u64, 8, 9] {
            let mut src = RandomSource::new(seed);
            let m = 1usize << 10;
            let mut table = CuckooTable::new(&mut src, m).unwrap();
            let target = (m as f64 * 0.45) as usize;
            let mut inserted = Vec::new();
            while inserted.len() < target {
                let key = src.uniform_u64();
                if table.contains(key) {
                    continue;
                }
                table.insert(key, key, &mut src).unwrap();
                inserted.push(key);
            }
            table.validate().unwrap();
            let mean = table.stats().displacements as f64 / target as f64;
            assert!(mean <= 10.0, "seed {seed}: mean displacements {mean}");
            assert!(table.stats().rehashes <= 3, "seed {seed}");
            for key in inserted {
                assert!(table.contains(key));
            }
        }
    }

    #[test]
    fn deletes_never_move_other_entries() {
        let mut src = RandomSource::new(10);
        let mut table = CuckooTable::new(&mut src, 1 << 9).unwrap();
        let keys: Vec<u64> = (0..200).map(|i| i * 7 + 1).collect();
        for &k in &keys {
            table.insert(k, k, &mut src).unwrap();
        }
        let snapshot = table.slots.clone();
        table.delete(keys[50]).unwrap();
        table.validate().unwrap();
        for (idx, slot) in table.slots.iter().enumerate() {
            if let Some((k, _)) = snapshot[idx] {
                if k != keys[50] {
                    assert!(matches!(slot, Some((stored, _)) if *stored == k));
                }
            }
        }
    }

    #[test]
    fn interleavings_match_reference_map() {
        let mut src = RandomSource::new(11);
        let mut table = CuckooTable::new(&mut src, 1 << 10).unwrap();
        let mut model = std::collections::HashMap::new();
        for _ in 0..10_000 {
            let key = src.uniform_below(600, Method::Rejection);
            if let std::collections::hash_map::Entry::Vacant(e) = model.entry(key) {
                let value = src.uniform_u64();
                table.insert(key, value, &mut src).unwrap();
                e.insert(value);
            } else {
                assert_eq!(table.delete(key).unwrap(), model.remove(&key).unwrap());
            }
        }
        table.validate().unwrap();
        assert_eq!(table.len(), model.len());
        for (&k, v) in &model {
            assert_eq!(table.lookup(k).0, Some(v));
        }
    }

    #[test]
    fn rehash_period_valve_triggers() {
        let mut src = RandomSource::new(12);
        let mut table = CuckooTable::new(&mut src, 1 << 8).unwrap();
        table.set_rehash_period(Some(10));
        for key in 0..30u64 {
            table.insert(key, key, &mut src).unwrap();
        }
        assert!(table.stats().rehashes >= 2);
        table.validate().unwrap();
        for key in 0..30u64 {
            assert!(table.contains(key));
        }
    }
}
