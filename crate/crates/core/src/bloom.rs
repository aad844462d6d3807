//! Bloom filter and counting Bloom filter with parameter planning.
//!
//! Planning follows the optimal-k derivation: m >= 1.442 n lg(1/eps) bits
//! and k = ln(2) / alpha' hash functions, where alpha' = (n/m)(1 + 1/m).
//! The k index functions are synthesized from two affine mod-prime handles
//! as h_i(x) = h(x) + i * h'(x) mod m.
//!
//! The counting variant replaces bits with small saturating counters and
//! never decrements a maxed-out counter, so legal deletes cannot create
//! false negatives.

use crate::hashing::{sample_mod_p, HashFamError, HashFunctionHandle};
use crate::rng::RandomSource;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BloomError {
    #[error("false-positive target must be in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("counter cap must be at least 1")]
    InvalidCap,
    #[error("decrement of a zero counter: key was never inserted")]
    CounterUnderflow,
    #[error("hash family error: {0}")]
    Family(#[from] HashFamError),
    #[error("malformed serialized filter: {0}")]
    Serialization(String),
}

/// Planned dimensions for a target insertion count and false-positive rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BloomParams {
    pub m: u64,
    pub n_target: u64,
    pub k: u32,
    pub alpha: f64,
    pub alpha_prime: f64,
}

/// m = ceil(1.442 n lg(1/eps)) + 1 bits, k = round(ln 2 / alpha'), floor 1.
pub fn plan(n_target: u64, epsilon_fp: f64) -> Result<BloomParams, BloomError> {
    if !(epsilon_fp > 0.0 && epsilon_fp < 1.0) {
        return Err(BloomError::InvalidEpsilon(epsilon_fp));
    }
    let n = n_target.max(1) as f64;
    let m = (1.442 * n * (1.0 / epsilon_fp).log2()).ceil() as u64 + 1;
    let m = m.max(2);
    let alpha = n / m as f64;
    let alpha_prime = alpha * (1.0 + 1.0 / m as f64);
    let k = (std::f64::consts::LN_2 / alpha_prime).round().max(1.0) as u32;
    Ok(BloomParams {
        m,
        n_target,
        k,
        alpha,
        alpha_prime,
    })
}

impl BloomParams {
    /// Probability that a fixed bit is set after `n` insertions:
    /// 1 - (1 - 1/m)^(k n).
    pub fn bit_set_probability(&self, n: u64) -> f64 {
        let ln_miss = (self.k as f64 * n as f64) * (-1.0 / self.m as f64).ln_1p();
        -(ln_miss.exp() - 1.0)
    }

    /// Exact-product false-positive prediction after `n` insertions.
    pub fn false_positive_rate(&self, n: u64) -> f64 {
        self.bit_set_probability(n).powi(self.k as i32)
    }
}

/// The two base handles combined as h(x) + i h'(x) mod m.
#[derive(Debug, Clone, PartialEq)]
struct IndexDeriver {
    base: HashFunctionHandle,
    step: HashFunctionHandle,
    m: u64,
}

impl IndexDeriver {
    fn sample(src: &mut RandomSource, universe_max: u64, m: u64) -> Result<Self, BloomError> {
        Ok(IndexDeriver {
            base: sample_mod_p(src, universe_max, m)?,
            step: sample_mod_p(src, universe_max, m)?,
            m,
        })
    }

    fn indexes(&self, key: u64, k: u32) -> impl Iterator<Item = usize> + '_ {
        let h = self.base.eval(key) as u128;
        let step = self.step.eval(key) as u128;
        let m = self.m as u128;
        (0..k as u128).map(move |i| ((h + i * step) % m) as usize)
    }
}

/// Plain bit-array filter: no false negatives, tunable false positives.
#[derive(Debug, Clone, PartialEq)]
pub struct BloomFilter {
    params: BloomParams,
    deriver: IndexDeriver,
    bits: Vec<u64>,
    inserted: u64,
}

impl BloomFilter {
    pub fn new(
        src: &mut RandomSource,
        params: BloomParams,
        universe_max: u64,
    ) -> Result<Self, BloomError> {
        let deriver = IndexDeriver::sample(src, universe_max, params.m)?;
        Ok(BloomFilter {
            params,
            deriver,
            bits: vec![0; params.m.div_ceil(64) as usize],
            inserted: 0,
        })
    }

    pub fn params(&self) -> BloomParams {
        self.params
    }

    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn insert(&mut self, key: u64) {
        for idx in self.deriver.indexes(key, self.params.k) {
            self.bits[idx / 64] |= 1 << (idx % 64);
        }
        self.inserted += 1;
    }

    pub fn query(&self, key: u64) -> bool {
        self.deriver
            .indexes(key, self.params.k)
            .all(|idx| self.bits[idx / 64] >> (idx % 64) & 1 == 1)
    }

    pub fn bits_set(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Header (m, k, variant, cap) then the raw array, little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"RLBF");
        out.push(1); // version
        out.push(0); // variant: bits
        out.push(0); // cap unused
        out.extend_from_slice(&self.params.m.to_le_bytes());
        out.extend_from_slice(&self.params.n_target.to_le_bytes());
        out.extend_from_slice(&self.params.k.to_le_bytes());
        out.extend_from_slice(&self.inserted.to_le_bytes());
        for handle in [&self.deriver.base, &self.deriver.step] {
            let bytes = handle.to_bytes();
            out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
            out.extend_from_slice(&bytes);
        }
        for word in &self.bits {
            out.extend_from_slice(&word.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, BloomError> {
        let mut r = Reader { bytes, pos: 0 };
        r.magic()?;
        if r.u8()? != 0 || r.u8()? != 0 {
            return Err(BloomError::Serialization("not a bit-variant filter".into()));
        }
        let m = r.u64()?;
        let n_target = r.u64()?;
        let k = r.u32()?;
        let inserted = r.u64()?;
        let base = r.handle()?;
        let step = r.handle()?;
        let words = m.div_ceil(64) as usize;
        let mut bits = Vec::with_capacity(words);
        for _ in 0..words {
            bits.push(r.u64()?);
        }
        r.finish()?;
        let alpha = n_target.max(1) as f64 / m as f64;
        Ok(BloomFilter {
            params: BloomParams {
                m,
                n_target,
                k,
                alpha,
                alpha_prime: alpha * (1.0 + 1.0 / m as f64),
            },
            deriver: IndexDeriver { base, step, m },
            bits,
            inserted,
        })
    }
}

/// Counting variant: saturating counters support deletion and multiplicity
/// estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingBloomFilter {
    params: BloomParams,
    deriver: IndexDeriver,
    counters: Vec<u8>,
    cap: u8,
}

impl CountingBloomFilter {
    /// Default cap is 15, one nibble per counter.
    pub fn new(
        src: &mut RandomSource,
        params: BloomParams,
        universe_max: u64,
        cap: u8,
    ) -> Result<Self, BloomError> {
        if cap == 0 {
            return Err(BloomError::InvalidCap);
        }
        let deriver = IndexDeriver::sample(src, universe_max, params.m)?;
        Ok(CountingBloomFilter {
            params,
            deriver,
            counters: vec![0; params.m as usize],
            cap,
        })
    }

    pub fn params(&self) -> BloomParams {
        self.params
    }

    pub fn cap(&self) -> u8 {
        self.cap
    }

    pub fn insert(&mut self, key: u64) {
        for idx in self.deriver.indexes(key, self.params.k) {
            let c = &mut self.counters[idx];
            if *c < self.cap {
                *c += 1;
            }
        }
    }

    /// Decrement the key's counters. Saturated counters stay put (they may
    /// be shared with other keys); a zero counter means the caller broke the
    /// insert-before-remove contract, and nothing is changed.
    pub fn remove(&mut self, key: u64) -> Result<(), BloomError> {
        // The derived positions can repeat, so aggregate decrements per
        // counter and validate before touching anything.
        let mut decrements: std::collections::HashMap<usize, u8> = std::collections::HashMap::new();
        for idx in self.deriver.indexes(key, self.params.k) {
            *decrements.entry(idx).or_insert(0) += 1;
        }
        for (&idx, &count) in &decrements {
            let current = self.counters[idx];
            if current < self.cap && current < count {
                return Err(BloomError::CounterUnderflow);
            }
        }
        for (idx, count) in decrements {
            let c = &mut self.counters[idx];
            if *c < self.cap {
                *c -= count;
            }
        }
        Ok(())
    }

    pub fn query(&self, key: u64) -> bool {
        self.deriver
            .indexes(key, self.params.k)
            .all(|idx| self.counters[idx] > 0)
    }

    /// min over the key's counters; upper-bounds the true multiplicity while
    /// no counter has saturated.
    pub fn count_estimate(&self, key: u64) -> u64 {
        self.deriver
            .indexes(key, self.params.k)
            .map(|idx| self.counters[idx] as u64)
            .min()
            .unwrap_or(0)
    }

    pub fn saturated_counters(&self) -> usize {
        self.counters.iter().filter(|&&c| c == self.cap).count()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"RLBF");
        out.push(1); // version
        out.push(1); // variant: counters
        out.push(self.cap);
        out.extend_from_slice(&self.params.m.to_le_bytes());
        out.extend_from_slice(&self.params.n_target.to_le_bytes());
        out.extend_from_slice(&self.params.k.to_le_bytes());
        out.extend_from_slice(&0u64.to_le_bytes());
        for handle in [&self.deriver.base, &self.deriver.step] {
            let bytes = handle.to_bytes();
            out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
            out.extend_from_slice(&bytes);
        }
        out.extend_from_slice(&self.counters);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, BloomError> {
        let mut r = Reader { bytes, pos: 0 };
        r.magic()?;
        if r.u8()? != 1 {
            return Err(BloomError::Serialization("not a counting filter".into()));
        }
        let cap = r.u8()?;
        if cap == 0 {
            return Err(BloomError::InvalidCap);
        }
        let m = r.u64()?;
        let n_target = r.u64()?;
        let k = r.u32()?;
        let _inserted = r.u64()?;
        let base = r.handle()?;
        let step = r.handle()?;
        let counters = r.rest().to_vec();
        if counters.len() != m as usize {
            return Err(BloomError::Serialization(
                "counter array size mismatch".into(),
            ));
        }
        let alpha = n_target.max(1) as f64 / m as f64;
        Ok(CountingBloomFilter {
            params: BloomParams {
                m,
                n_target,
                k,
                alpha,
                alpha_prime: alpha * (1.0 + 1.0 / m as f64),
            },
            deriver: IndexDeriver { base, step, m },
            counters,
            cap,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], BloomError> {
        if self.pos + n > self.bytes.len() {
            return Err(BloomError::Serialization("truncated".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn magic(&mut self) -> Result<(), BloomError> {
        if self.take(4)? != b"RLBF" {
            return Err(BloomError::Serialization("bad magic".into()));
        }
        if self.take(1)?[0] != 1 {
            return Err(BloomError::Serialization("unknown version".into()));
        }
        Ok(())
    }
    fn u8(&mut self) -> Result<u8, BloomError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, BloomError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, BloomError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn handle(&mut self) -> Result<HashFunctionHandle, BloomError> {
        let len = self.u32()? as usize;
        Ok(HashFunctionHandle::from_bytes(self.take(len)?)?)
    }
    fn rest(&mut self) -> &'a [u8] {
        let s = &self.bytes[self.pos..];
        self.pos = self.bytes.len();
        s
    }
    fn finish(&self) -> Result<(), BloomError> {
        if self.pos != self.bytes.len() {
            return Err(BloomError::Serialization("trailing bytes".into()));
        }
        Ok(())
    }
}
