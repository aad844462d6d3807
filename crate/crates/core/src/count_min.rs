//! Count-min sketch over a stream of (index, count) updates.
//!
//! A d x w counter array with one 2-universal row hash per row, sized
//! w = ceil(e / epsilon) and d = ceil(ln(1 / delta)). Point queries take the
//! row minimum for nonnegative streams (never below the truth, above it by
//! more than epsilon * |a|_1 with probability at most delta) or the row
//! median for signed streams. Inner products take the row minimum of the
//! row dot products. A heavy-hitter tracker rides on top of the sketch,
//! admitting an index when its estimate clears phi * |a|_1 and lazily
//! evicting entries whose stored estimate has fallen below the rising
//! threshold.

use crate::hashing::{sample_mod_p, HashFamError, HashFunctionHandle};
use crate::rng::RandomSource;
use std::collections::{BinaryHeap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CmsError {
    #[error("epsilon and delta must be in (0, 1)")]
    InvalidParams,
    #[error("negative update in a nonnegative-mode sketch")]
    NegativeUpdate,
    #[error("operation requires a nonnegative-mode sketch")]
    WrongMode,
    #[error("sketches must share dimensions and row hashes")]
    MismatchedConfig,
    #[error("hash family error: {0}")]
    Family(#[from] HashFamError),
    #[error("malformed stream: {0}")]
    MalformedStream(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmsParams {
    pub epsilon: f64,
    pub delta: f64,
    pub width: u32,
    pub depth: u32,
}

impl CmsParams {
    /// width = ceil(e / epsilon), depth = ceil(ln(1 / delta)).
    pub fn new(epsilon: f64, delta: f64) -> Result<Self, CmsError> {
        if !(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0) {
            return Err(CmsError::InvalidParams);
        }
        Ok(CmsParams {
            epsilon,
            delta,
            width: (std::f64::consts::E / epsilon).ceil() as u32,
            depth: (1.0 / delta).ln().ceil().max(1.0) as u32,
        })
    }
}

/// Whether the stream may carry negative counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamMode {
    NonNegative,
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountMinSketch {
    params: CmsParams,
    mode: StreamMode,
    rows: Vec<HashFunctionHandle>,
    cells: Vec<i64>,
    /// Exact |a|_1 for nonnegative streams; sum of |c_t| (an upper bound on
    /// |a|_1) for general streams.
    l1_mass: i64,
}

impl CountMinSketch {
    pub fn new(
        src: &mut RandomSource,
        params: CmsParams,
        mode: StreamMode,
        universe_max: u64,
    ) -> Result<Self, CmsError> {
        let rows = (0..params.depth)
            .map(|_| sample_mod_p(src, universe_max, params.width as u64))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CountMinSketch {
            params,
            mode,
            rows,
            cells: vec![0; params.depth as usize * params.width as usize],
            l1_mass: 0,
        })
    }

    pub fn params(&self) -> CmsParams {
        self.params
    }

    pub fn mode(&self) -> StreamMode {
        self.mode
    }

    /// Running l1 tracker: exact stream mass in nonnegative mode, a
    /// conservative upper bound in general mode.
    pub fn l1_mass(&self) -> i64 {
        self.l1_mass
    }

    fn cell(&self, row: usize, col: usize) -> i64 {
        self.cells[row * self.params.width as usize + col]
    }

    pub fn update(&mut self, index: u64, count: i64) -> Result<(), CmsError> {
        if count < 0 && self.mode == StreamMode::NonNegative {
            return Err(CmsError::NegativeUpdate);
        }
        let width = self.params.width as usize;
        for (row, hash) in self.rows.iter().enumerate() {
            let col = hash.eval(index) as usize;
            self.cells[row * width + col] += count;
        }
        self.l1_mass += count.abs();
        Ok(())
    }

    /// Row-minimum estimate; requires nonnegative mode, never undershoots.
    pub fn point_query_min(&self, index: u64) -> Result<i64, CmsError> {
        if self.mode != StreamMode::NonNegative {
            return Err(CmsError::WrongMode);
        }
        Ok(self
            .rows
            .iter()
            .enumerate()
            .map(|(row, hash)| self.cell(row, hash.eval(index) as usize))
            .min()
            .expect("depth >= 1"))
    }

    /// Row-median estimate (lower median for even depth); valid for signed
    /// streams.
    pub fn point_query_median(&self, index: u64) -> i64 {
        let mut values: Vec<i64> = self
            .rows
            .iter()
            .enumerate()
            .map(|(row, hash)| self.cell(row, hash.eval(index) as usize))
            .collect();
        values.sort_unstable();
        values[(values.len() - 1) / 2]
    }

    /// Row-minimum estimate of the inner product of two nonnegative streams
    /// sketched with identical parameters and row hashes.
    pub fn inner_product(&self, other: &CountMinSketch) -> Result<i64, CmsError> {
        if self.mode != StreamMode::NonNegative || other.mode != StreamMode::NonNegative {
            return Err(CmsError::WrongMode);
        }
        if self.params != other.params || self.rows != other.rows {
            return Err(CmsError::MismatchedConfig);
        }
        let width = self.params.width as usize;
        Ok((0..self.params.depth as usize)
            .map(|row| {
                (0..width)
                    .map(|col| self.cell(row, col) * other.cell(row, col))
                    .sum::<i64>()
            })
            .min()
            .expect("depth >= 1"))
    }

    /// Per-row cell sums; each equals the total update mass pushed in.
    pub fn row_sums(&self) -> Vec<i64> {
        let width = self.params.width as usize;
        (0..self.params.depth as usize)
            .map(|row| self.cells[row * width..(row + 1) * width].iter().sum())
            .collect()
    }
}

/// Compact binary stream layout: magic, version, then one little-endian
/// (u64 index, i64 count) pair per record.
pub fn write_binary_stream(updates: &[(u64, i64)]) -> Vec<u8> {
    let mut out = Vec::with_capacity(5 + updates.len() * 16);
    out.extend_from_slice(b"RLCS");
    out.push(1);
    for &(index, count) in updates {
        out.extend_from_slice(&index.to_le_bytes());
        out.extend_from_slice(&count.to_le_bytes());
    }
    out
}

pub fn read_binary_stream(bytes: &[u8]) -> Result<Vec<(u64, i64)>, CmsError> {
    if bytes.len() < 5 || &bytes[..4] != b"RLCS" || bytes[4] != 1 {
        return Err(CmsError::MalformedStream("bad magic or version".into()));
    }
    let body = &bytes[5..];
    if !body.len().is_multiple_of(16) {
        return Err(CmsError::MalformedStream("truncated record".into()));
    }
    Ok(body
        .chunks_exact(16)
        .map(|chunk| {
            (
                u64::from_le_bytes(chunk[..8].try_into().unwrap()),
                i64::from_le_bytes(chunk[8..].try_into().unwrap()),
            )
        })
        .collect())
}

/// Text stream layout: one `index count` pair per line; blank lines and
/// `#` comments are skipped.
pub fn read_text_stream(text: &str) -> Result<Vec<(u64, i64)>, CmsError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse_err = || CmsError::MalformedStream(format!("line {}", lineno + 1));
        let index: u64 = fields
            .next()
            .ok_or_else(parse_err)?
            .parse()
            .map_err(|_| parse_err())?;
        let count: i64 = fields
            .next()
            .ok_or_else(parse_err)?
            .parse()
            .map_err(|_| parse_err())?;
        out.push((index, count));
    }
    Ok(out)
}

/// Streaming tracker for indices whose mass clears a phi fraction of the
/// stream.
#[derive(Debug, Clone)]
pub struct HeavyHitterTracker {
    phi: f64,
    entries: HashMap<u64, i64>,
    /// Min-heap of (stored estimate, index); stale copies are skipped on pop.
    heap: BinaryHeap<std::cmp::Reverse<(i64, u64)>>,
}

impl HeavyHitterTracker {
    pub fn new(phi: f64) -> Self {
        HeavyHitterTracker {
            phi,
            entries: HashMap::new(),
            heap: BinaryHeap::new(),
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Feed one update through the sketch and maintain the tracked set.
    pub fn heavy_update(
        &mut self,
        sketch: &mut CountMinSketch,
        index: u64,
        count: i64,
    ) -> Result<(), CmsError> {
        if sketch.mode() != StreamMode::NonNegative {
            return Err(CmsError::WrongMode);
        }
        sketch.update(index, count)?;
        let threshold = self.phi * sketch.l1_mass() as f64;
        let estimate = sketch.point_query_min(index)?;
        if estimate as f64 >= threshold {
            self.entries.insert(index, estimate);
            self.heap.push(std::cmp::Reverse((estimate, index)));
        }
        // Lazily evict entries whose stored estimate fell under the rising
        // threshold.
        while let Some(std::cmp::Reverse((estimate, index))) = self.heap.peek().copied() {
            match self.entries.get(&index) {
                Some(&stored) if stored == estimate => {
                    if (estimate as f64) < threshold {
                        self.heap.pop();
                        self.entries.remove(&index);
                    } else {
                        break;
                    }
                }
                _ => {
                    self.heap.pop(); // stale copy
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, index: u64) -> bool {
        self.entries.contains_key(&index)
    }

    /// Tracked (index, stored estimate) pairs, heaviest first.
    pub fn contents(&self) -> Vec<(u64, i64)> {
        let mut out: Vec<(u64, i64)> = self.entries.iter().map(|(&i, &e)| (i, e)).collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        out
    }
}
