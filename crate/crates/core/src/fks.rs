//! Static two-level perfect hash table with worst-case two-probe lookups.
//!
//! The outer function spreads `n` keys over `n` bins and is resampled until
//! the squared bin loads satisfy sum(n_i^2) <= 4n; by Markov on the
//! 2-universal expectation (below 2n) each attempt succeeds with probability
//! at least 1/2. Each bin then gets its own function into max(1, n_i^2)
//! slots, resampled until injective. Total slots never exceed 5n.

use crate::hashing::{sample_mod_p, HashFamError, HashFunctionHandle};
use crate::rng::RandomSource;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FksError {
    #[error("keys must be distinct")]
    DuplicateKeys,
    #[error("key set must be nonempty")]
    Empty,
    #[error("hash family error: {0}")]
    Family(#[from] HashFamError),
    #[error("build did not converge")]
    BuildFailed,
    #[error("malformed serialized table: {0}")]
    Serialization(String),
}

const MAX_RESAMPLES: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
struct Bin<V> {
    inner: Option<HashFunctionHandle>,
    slots: Vec<Option<(u64, V)>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FksBuildStats {
    pub outer_resamples: u64,
    pub inner_resamples: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LookupOutcome {
    pub found: bool,
    /// Hash evaluations spent on this probe; never exceeds 2.
    pub hash_evals: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FksTable<V> {
    outer: HashFunctionHandle,
    bins: Vec<Bin<V>>,
    total_slots: usize,
    len: usize,
    stats: FksBuildStats,
}

impl<V: Clone> FksTable<V> {
    pub fn build(src: &mut RandomSource, pairs: &[(u64, V)]) -> Result<Self, FksError> {
        if pairs.is_empty() {
            return Err(FksError::Empty);
        }
        let mut sorted: Vec<u64> = pairs.iter().map(|(k, _)| *k).collect();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(FksError::DuplicateKeys);
        }
        let n = pairs.len() as u64;
        let universe_max = *sorted.last().expect("nonempty");
        let mut stats = FksBuildStats::default();

        // Outer pass: resample until the squared loads are in budget.
        let (outer, loads) = loop {
            let candidate = sample_mod_p(src, universe_max, n)?;
            let mut loads = vec![0u64; n as usize];
            for &(key, _) in pairs {
                loads[candidate.eval(key) as usize] += 1;
            }
            let squared: u64 = loads.iter().map(|l| l * l).sum();
            if squared <= 4 * n {
                break (candidate, loads);
            }
            stats.outer_resamples += 1;
            if stats.outer_resamples > MAX_RESAMPLES {
                return Err(FksError::BuildFailed);
            }
        };

        // Inner pass: a perfect function per bin.
        let mut bins: Vec<Bin<V>> = loads
            .iter()
            .map(|&load| Bin {
                inner: None,
                slots: vec![None; (load * load).max(1) as usize],
            })
            .collect();
        let mut grouped: Vec<Vec<(u64, V)>> = vec![Vec::new(); n as usize];
        for (key, value) in pairs.iter().cloned() {
            grouped[outer.eval(key) as usize].push((key, value));
        }
        for (bin, members) in bins.iter_mut().zip(grouped) {
            if members.is_empty() {
                continue;
            }
            let slot_count = bin.slots.len() as u64;
            'resample: loop {
                let inner = sample_mod_p(src, universe_max, slot_count)?;
                for slot in bin.slots.iter_mut() {
                    *slot = None;
                }
                for (key, value) in &members {
                    let idx = inner.eval(*key) as usize;
                    if bin.slots[idx].is_some() {
                        stats.inner_resamples += 1;
                        if stats.inner_resamples > MAX_RESAMPLES * n {
                            return Err(FksError::BuildFailed);
                        }
                        continue 'resample;
                    }
                    bin.slots[idx] = Some((*key, value.clone()));
                }
                bin.inner = Some(inner);
                break;
            }
        }
        let total_slots = bins.iter().map(|b| b.slots.len()).sum();
        Ok(FksTable {
            outer,
            bins,
            total_slots,
            len: pairs.len(),
            stats,
        })
    }

    pub fn lookup(&self, key: u64) -> (Option<&V>, LookupOutcome) {
        let bin = &self.bins[self.outer.eval(key) as usize];
        let Some(inner) = &bin.inner else {
            return (
                None,
                LookupOutcome {
                    found: false,
                    hash_evals: 1,
                },
            );
        };
        let slot = &bin.slots[inner.eval(key) as usize];
        match slot {
            Some((stored, value)) if *stored == key => (
                Some(value),
                LookupOutcome {
                    found: true,
                    hash_evals: 2,
                },
            ),
            _ => (
                None,
                LookupOutcome {
                    found: false,
                    hash_evals: 2,
                },
            ),
        }
    }

    pub fn contains(&self, key: u64) -> bool {
        self.lookup(key).1.found
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn total_slots(&self) -> usize {
        self.total_slots
    }

    pub fn stats(&self) -> FksBuildStats {
        self.stats
    }

    /// Check that every inner function is injective on its bin.
    pub fn validate(&self) -> Result<(), String> {
        let mut seen = 0usize;
        for (i, bin) in self.bins.iter().enumerate() {
            let occupied = bin.slots.iter().flatten().count();
            seen += occupied;
            for slot in bin.slots.iter().flatten() {
                let (key, _) = slot;
                if self.outer.eval(*key) as usize != i {
                    return Err(format!("key {key} stored in the wrong bin"));
                }
                let inner = bin.inner.as_ref().ok_or("occupied bin without inner")?;
                let idx = inner.eval(*key) as usize;
                if !matches!(&bin.slots[idx], Some((k, _)) if k == key) {
                    return Err(format!("key {key} not at its inner slot"));
                }
            }
        }
        if seen != self.len {
            return Err(format!("{seen} stored keys but len {}", self.len));
        }
        Ok(())
    }
}

impl FksTable<u64> {
    /// Versioned binary layout for load-then-query workflows: outer handle,
    /// bin directory, inner handles, and slot payloads.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"RLFK");
        out.push(1);
        out.extend_from_slice(&(self.len as u64).to_le_bytes());
        let outer = self.outer.to_bytes();
        out.extend_from_slice(&(outer.len() as u32).to_le_bytes());
        out.extend_from_slice(&outer);
        out.extend_from_slice(&(self.bins.len() as u64).to_le_bytes());
        for bin in &self.bins {
            match &bin.inner {
                None => out.push(0),
                Some(inner) => {
                    out.push(1);
                    let bytes = inner.to_bytes();
                    out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
                    out.extend_from_slice(&bytes);
                }
            }
            out.extend_from_slice(&(bin.slots.len() as u64).to_le_bytes());
            for slot in &bin.slots {
                match slot {
                    None => out.push(0),
                    Some((key, value)) => {
                        out.push(1);
                        out.extend_from_slice(&key.to_le_bytes());
                        out.extend_from_slice(&value.to_le_bytes());
                    }
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FksError> {
        let mut pos = 0usize;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8], FksError> {
            if *pos + n > bytes.len() {
                return Err(FksError::Serialization("truncated".into()));
            }
            let s = &bytes[*pos..*pos + n];
            *pos += n;
            Ok(s)
        };
        if take(&mut pos, 4)? != b"RLFK" {
            return Err(FksError::Serialization("bad magic".into()));
        }
        if take(&mut pos, 1)?[0] != 1 {
            return Err(FksError::Serialization("unknown version".into()));
        }
        let len = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
        let outer_len = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let outer = HashFunctionHandle::from_bytes(take(&mut pos, outer_len)?)?;
        let bin_count = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
        let mut bins = Vec::with_capacity(bin_count);
        for _ in 0..bin_count {
            let inner = match take(&mut pos, 1)?[0] {
                0 => None,
                1 => {
                    let ilen = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
                    Some(HashFunctionHandle::from_bytes(take(&mut pos, ilen)?)?)
                }
                _ => return Err(FksError::Serialization("bad inner tag".into())),
            };
            let slot_count = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
            let mut slots = Vec::with_capacity(slot_count);
            for _ in 0..slot_count {
                let slot = match take(&mut pos, 1)?[0] {
                    0 => None,
                    1 => {
                        let key = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
                        let value = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
                        Some((key, value))
                    }
                    _ => return Err(FksError::Serialization("bad slot tag".into())),
                };
                slots.push(slot);
            }
            bins.push(Bin { inner, slots });
        }
        if pos != bytes.len() {
            return Err(FksError::Serialization("trailing bytes".into()));
        }
        let total_slots = bins.iter().map(|b| b.slots.len()).sum();
        Ok(FksTable {
            outer,
            bins,
            total_slots,
            len,
            stats: FksBuildStats::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_keys(src: &mut RandomSource, count: usize, bits: u32) -> Vec<(u64, u64)> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let key = src.next_bits(bits);
            if seen.insert(key) {
                out.push((key, key.wrapping_mul(3)));
            }
        }
        out
    }

    #[test]
    fn single_key_table() {
        let mut src = RandomSource::new(1);
        let table = FksTable::build(&mut src, &[(42u64, 7u64)]).unwrap();
        assert_eq!(table.total_slots(), 1);
        table.validate().unwrap();
        let (value, outcome) = table.lookup(42);
        assert_eq!(value, Some(&7));
        assert_eq!(outcome.hash_evals, 2);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut src = RandomSource::new(2);
        assert_eq!(
            FksTable::<u64>::build(&mut src, &[]).unwrap_err(),
            FksError::Empty
        );
        assert_eq!(
            FksTable::build(&mut src, &[(1, 1u64), (1, 2)]).unwrap_err(),
            FksError::DuplicateKeys
        );
    }

    #[test]
    fn space_budget_on_random_keys() {
        let mut src = RandomSource::new(3);
        let pairs = random_keys(&mut src, 64, 32);
        let table = FksTable::build(&mut src, &pairs).unwrap();
        table.validate().unwrap();
        assert!(table.total_slots() <= 5 * 64, "{}", table.total_slots());
    }

    #[test]
    fn outer_resamples_average_below_two() {
        let mut total_resamples = 0u64;
        let builds = 100;
        for seed in 0..builds {
            let mut src = RandomSource::new(seed);
            let pairs = random_keys(&mut src, 500, 40);
            let table = FksTable::build(&mut src, &pairs).unwrap();
            total_resamples += table.stats().outer_resamples;
        }
        let mean = total_resamples as f64 / builds as f64;
        assert!(mean <= 2.0, "mean outer resamples {mean}");
    }

    #[test]
    fn lookup_agrees_with_reference_set() {
        let mut src = RandomSource::new(4);
        let pairs = random_keys(&mut src, 2000, 24);
        let table = FksTable::build(&mut src, &pairs).unwrap();
        let reference: std::collections::HashMap<u64, u64> = pairs.iter().copied().collect();
        for _ in 0..100_000 {
            let probe = src.next_bits(24);
            let (value, outcome) = table.lookup(probe);
            assert!(outcome.hash_evals <= 2);
            assert_eq!(value.copied(), reference.get(&probe).copied());
        }
    }

    #[test]
    fn serialization_round_trip() {
        let mut src = RandomSource::new(5);
        let pairs = random_keys(&mut src, 300, 32);
        let table = FksTable::build(&mut src, &pairs).unwrap();
        let restored = FksTable::from_bytes(&table.to_bytes()).unwrap();
        restored.validate().unwrap();
        for &(key, value) in &pairs {
            assert_eq!(restored.lookup(key).0, Some(&value));
        }
        assert!(FksTable::from_bytes(b"junk").is_err());
    }
}
