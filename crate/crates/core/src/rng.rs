//! Seeded source of random bits and derived samplers.
//!
//! Every randomized structure in this crate draws its randomness through
//! [`RandomSource`], so a run is fully determined by its seed. The source
//! counts every bit it hands out; the experiment harness surfaces that count
//! in its reports.
//!
//! The backing generator is SplitMix64, a counter-based mixer with period
//! exactly 2^64. It is statistically solid for simulation work but not
//! cryptographic, and the ideal-coin model it stands in for is stronger than
//! any PRNG; we document the gap rather than model it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RngError {
    #[error("probability must be in (0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("weights must be nonnegative, finite, and sum to a positive value")]
    InvalidWeights,
}

/// How [`RandomSource::uniform_below`] turns raw bits into an integer in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Draw ceil(lg n) bits, retry until the value lands below `n`.
    /// Costs at most `2 ceil(lg n)` bits on average.
    Rejection,
    /// Refine a dyadic interval one bit at a time until it nests inside a
    /// single output cell. Costs at most `ceil(lg n) + 2` bits on average.
    RangeCoding,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Counter(SplitMix64),
    /// Fixed bit tape, for replay and exhaustive-enumeration tests.
    Tape {
        bits: Vec<bool>,
        pos: usize,
    },
}

/// Deterministic stream of unbiased bits.
///
/// Two sources built with the same seed produce identical bit streams, and
/// `bits_consumed` is exactly the number of bits drawn since creation.
/// A source is single-owner; concurrent trials fork children with distinct
/// stream ids instead of sharing one stream.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    bits_consumed: u64,
    backend: Backend,
    word: u64,
    word_bits: u32,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            seed,
            bits_consumed: 0,
            backend: Backend::Counter(SplitMix64 { state: seed }),
            word: 0,
            word_bits: 0,
        }
    }

    /// Source that replays a fixed bit tape. Panics if a draw runs past the
    /// end of the tape.
    pub fn from_tape(bits: &[bool]) -> Self {
        RandomSource {
            seed: 0,
            bits_consumed: 0,
            backend: Backend::Tape {
                bits: bits.to_vec(),
                pos: 0,
            },
            word: 0,
            word_bits: 0,
        }
    }

    /// Child source derived from `(parent seed, stream_id)`. Children with
    /// distinct stream ids never share a stream with each other or with the
    /// parent; forking does not consume parent bits.
    pub fn fork(&self, stream_id: u64) -> RandomSource {
        match self.backend {
            Backend::Counter(_) => {
                let child = mix64(self.seed.wrapping_add(mix64(stream_id ^ GOLDEN_GAMMA)));
                RandomSource::new(child)
            }
            Backend::Tape { .. } => panic!("cannot fork a tape-backed source"),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bits_consumed(&self) -> u64 {
        self.bits_consumed
    }

    fn draw_bit(&mut self) -> bool {
        let bit = match &mut self.backend {
            Backend::Counter(gen) => {
                if self.word_bits == 0 {
                    self.word = gen.next_u64();
                    self.word_bits = 64;
                }
                self.word_bits -= 1;
                (self.word >> self.word_bits) & 1 == 1
            }
            Backend::Tape { bits, pos } => {
                assert!(*pos < bits.len(), "tape-backed source ran out of bits");
                let b = bits[*pos];
                *pos += 1;
                b
            }
        };
        self.bits_consumed += 1;
        bit
    }

    /// Next `count` bits (most significant first) as an integer, `count <= 64`.
    pub fn next_bits(&mut self, count: u32) -> u64 {
        assert!(count <= 64);
        match &mut self.backend {
            Backend::Counter(gen) => {
                // Chunked fast path; bit-for-bit identical to drawing one
                // bit at a time from the buffered word, MSB first.
                let mut out = 0u64;
                let mut needed = count;
                while needed > 0 {
                    if self.word_bits == 0 {
                        self.word = gen.next_u64();
                        self.word_bits = 64;
                    }
                    let take = needed.min(self.word_bits);
                    let chunk = (self.word >> (self.word_bits - take)) & (u64::MAX >> (64 - take));
                    out = if take == 64 {
                        chunk
                    } else {
                        (out << take) | chunk
                    };
                    self.word_bits -= take;
                    needed -= take;
                }
                self.bits_consumed += count as u64;
                out
            }
            Backend::Tape { .. } => {
                let mut v = 0u64;
                for _ in 0..count {
                    v = (v << 1) | self.draw_bit() as u64;
                }
                v
            }
        }
    }

    pub fn uniform_u64(&mut self) -> u64 {
        self.next_bits(64)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision; consumes exactly 53 bits.
    pub fn uniform_f64(&mut self) -> f64 {
        self.next_bits(53) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform integer in `[0, n)`, each value with probability exactly `1/n`.
    ///
    /// `n = 1` consumes zero bits. Panics if `n = 0`, or if `n > 2^32` with
    /// the range-coding method (rejection supports the full `u64` range).
    pub fn uniform_below(&mut self, n: u64, method: Method) -> u64 {
        assert!(n >= 1, "uniform_below requires n >= 1");
        if n == 1 {
            return 0;
        }
        match method {
            Method::Rejection => {
                let width = ceil_log2(n);
                loop {
                    let s = self.next_bits(width);
                    if s < n {
                        return s;
                    }
                }
            }
            Method::RangeCoding => {
                assert!(n <= 1 << 32, "range coding supports n up to 2^32");
                // Interval [num/2^k, (num+1)/2^k), held as exact integers.
                // Emit s once the interval nests inside [s/n, (s+1)/n).
                let n = n as u128;
                let mut num: u128 = 0;
                let mut k: u32 = 0;
                loop {
                    num = (num << 1) | self.draw_bit() as u128;
                    k += 1;
                    let scaled = n * num;
                    let s = scaled >> k;
                    if scaled + n <= (s + 1) << k {
                        return s as u64;
                    }
                    // Straddling a cell boundary for 95 refinements has
                    // probability below 2^-63 per call.
                    assert!(k < 96, "range coding failed to terminate");
                }
            }
        }
    }

    /// Exact Bernoulli(p) trial; consumes two bits on average.
    ///
    /// Compares the bit stream against the binary expansion of `p`, deciding
    /// at the first disagreement. `p >= 1` returns true and `p <= 0` false,
    /// both without consuming bits.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p >= 1.0 {
            return true;
        }
        if p <= 0.0 {
            return false;
        }
        let mut frac = p;
        loop {
            frac *= 2.0;
            let expansion_bit = frac >= 1.0;
            if expansion_bit {
                frac -= 1.0;
            }
            let stream_bit = self.draw_bit();
            if stream_bit != expansion_bit {
                // stream below expansion => success
                return !stream_bit;
            }
            if frac == 0.0 {
                return false;
            }
        }
    }

    /// Number of trials up to and including the first success of a
    /// Bernoulli(p) sequence: `Pr[value = n] = (1-p)^(n-1) p`.
    pub fn geometric(&mut self, p: f64) -> Result<GeometricSample, RngError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(RngError::InvalidProbability(p));
        }
        let mut value = 1u64;
        while !self.bernoulli(p) {
            value += 1;
        }
        Ok(GeometricSample { value, p })
    }

    /// Fisher-Yates shuffle; every permutation equally likely.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.uniform_below(i as u64 + 1, Method::Rejection) as usize;
            items.swap(i, j);
        }
    }
}

/// Outcome of a run of Bernoulli trials: `value >= 1` is the index of the
/// first success.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricSample {
    pub value: u64,
    pub p: f64,
}

/// Bits needed to cover `[0, n)`: ceil(lg n).
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Finite distribution sampled by inverse transform; consumes 53 bits per draw.
#[derive(Debug, Clone)]
pub struct Discrete {
    cumulative: Vec<f64>,
}

impl Discrete {
    pub fn new(weights: &[f64]) -> Result<Self, RngError> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(RngError::InvalidWeights);
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(RngError::InvalidWeights);
        }
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        Ok(Discrete { cumulative })
    }

    pub fn sample(&self, src: &mut RandomSource) -> usize {
        let u = src.uniform_f64();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}
