//! Bit-sampling locality-sensitive hashing for Hamming distance.
//!
//! One sampled bit position collides on points at distance r with
//! probability 1 - r/d. An index for radii (r1, r2) concatenates
//! k = ceil(log_{1/p2} n) sampled bits per table to suppress far points and
//! keeps ell = ceil(n^rho) tables per replica, rho = ln(1/p1)/ln(1/p2), so a
//! near point is found in some table with constant probability. A query
//! examines at most 2*ell candidates per replica and returns the first one
//! whose exact distance is at most r2, so answers are never farther than r2.
//! Replicas drive the residual failure probability below delta.
//!
//! If r1/d >= 1/ln n the parameters degrade, so points are padded with
//! ceil(d ln n) virtual zero bits; sampled positions beyond the stored
//! width simply read as zero. l1 vectors on [0,1] ride on the same index
//! through a unary threshold embedding.

use crate::hashing::{sample_mod_p, HashFamError, HashFunctionHandle};
use crate::rng::{Method, RandomSource};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LshError {
    #[error("dataset must be nonempty")]
    EmptyDataset,
    #[error("radii must satisfy 0 < r1 < r2 <= dimension")]
    RadiusOrder,
    #[error("vector length {got} does not match index dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {0} outside [0, 1]")]
    CoordinateOutOfRange(f64),
    #[error("resolution must be at least 1")]
    InvalidResolution,
    #[error("probability target must be in (0, 1)")]
    InvalidDelta,
    #[error("hash family error: {0}")]
    Family(#[from] HashFamError),
    #[error("malformed dataset text: {0}")]
    Parse(String),
}

/// Packed bit vector with cheap Hamming distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_01_str(text: &str) -> Result<Self, LshError> {
        let mut v = BitVector::zeros(text.len());
        for (i, ch) in text.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => v.set(i, true),
                other => return Err(LshError::Parse(format!("unexpected character {other:?}"))),
            }
        }
        Ok(v)
    }

    pub fn random(src: &mut RandomSource, len: usize) -> Self {
        let mut v = BitVector::zeros(len);
        for word in v.words.iter_mut() {
            *word = src.uniform_u64();
        }
        if !len.is_multiple_of(64) {
            let last = v.words.len() - 1;
            v.words[last] &= (1u64 << (len % 64)) - 1;
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn hamming(&self, other: &BitVector) -> u32 {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }
}

/// Derived index parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LshParams {
    /// Stored vector width.
    pub real_dim: usize,
    /// Width after virtual zero padding.
    pub dim: usize,
    pub r1: u32,
    pub r2: u32,
    pub p1: f64,
    pub p2: f64,
    pub k: u32,
    pub rho: f64,
    pub ell: u32,
    pub replicas: u32,
    pub delta: f64,
}

/// Failure probability of a single replica: a miss in all ell tables plus
/// the 2*ell truncation event.
pub const REPLICA_FAILURE_BOUND: f64 = 0.8678794411714423; // 1/e + 1/2

pub fn compute_params(
    real_dim: usize,
    n: usize,
    r1: u32,
    r2: u32,
    delta: f64,
) -> Result<LshParams, LshError> {
    if n == 0 {
        return Err(LshError::EmptyDataset);
    }
    if r1 == 0 || r1 >= r2 || r2 as usize > real_dim {
        return Err(LshError::RadiusOrder);
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(LshError::InvalidDelta);
    }
    let ln_n = (n.max(2) as f64).ln();
    // Padding rule: force r1/d below 1/ln n with virtual junk bits.
    let dim = if (r1 as f64) / (real_dim as f64) >= 1.0 / ln_n {
        real_dim + (real_dim as f64 * ln_n).ceil() as usize
    } else {
        real_dim
    };
    let d = dim as f64;
    let p1 = 1.0 - r1 as f64 / d;
    let p2 = 1.0 - r2 as f64 / d;
    let k = ((n as f64).ln() / (1.0 / p2).ln()).ceil().max(1.0) as u32;
    let rho = (1.0 / p1).ln() / (1.0 / p2).ln();
    let ell = (n as f64).powf(rho).ceil().max(1.0) as u32;
    let replicas = ((1.0 / delta).ln() / (1.0 / REPLICA_FAILURE_BOUND).ln())
        .ceil()
        .max(1.0) as u32;
    Ok(LshParams {
        real_dim,
        dim,
        r1,
        r2,
        p1,
        p2,
        k,
        rho,
        ell,
        replicas,
        delta,
    })
}

#[derive(Debug, Clone)]
struct Table {
    /// k sampled bit positions in [0, dim); positions beyond real_dim read 0.
    positions: Vec<u32>,
    buckets: HashMap<u64, Vec<u32>>,
}

#[derive(Debug, Clone)]
struct Replica {
    tables: Vec<Table>,
}

/// Index answering near-neighbor queries for a fixed radius pair.
#[derive(Debug, Clone)]
pub struct PlebIndex {
    params: LshParams,
    points: Vec<BitVector>,
    replicas: Vec<Replica>,
    /// Reduces a k-bit sample tuple to a machine-word bucket key.
    reducer: HashFunctionHandle,
}

/// Outcome of one query against one replica (or the whole index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryOutcome {
    /// (point id, exact Hamming distance), never farther than r2.
    pub result: Option<(usize, u32)>,
    /// Exact distance computations spent; at most 2*ell per replica.
    pub candidates_examined: u32,
}

impl PlebIndex {
    pub fn build(
        src: &mut RandomSource,
        points: Vec<BitVector>,
        r1: u32,
        r2: u32,
        delta: f64,
    ) -> Result<Self, LshError> {
        if points.is_empty() {
            return Err(LshError::EmptyDataset);
        }
        let real_dim = points[0].len();
        for p in &points {
            if p.len() != real_dim {
                return Err(LshError::DimensionMismatch {
                    expected: real_dim,
                    got: p.len(),
                });
            }
        }
        let params = compute_params(real_dim, points.len(), r1, r2, delta)?;
        let reducer = sample_mod_p(src, (1u64 << 62) - 1, 1 << 61)?;
        let mut replicas = Vec::with_capacity(params.replicas as usize);
        for _ in 0..params.replicas {
            let mut tables = Vec::with_capacity(params.ell as usize);
            for _ in 0..params.ell {
                let positions: Vec<u32> = (0..params.k)
                    .map(|_| src.uniform_below(params.dim as u64, Method::Rejection) as u32)
                    .collect();
                let mut buckets: HashMap<u64, Vec<u32>> = HashMap::new();
                for (id, point) in points.iter().enumerate() {
                    let key = reduce_tuple(&reducer, &sample_bits(point, &positions));
                    buckets.entry(key).or_default().push(id as u32);
                }
                tables.push(Table { positions, buckets });
            }
            replicas.push(Replica { tables });
        }
        Ok(PlebIndex {
            params,
            points,
            replicas,
            reducer,
        })
    }

    pub fn params(&self) -> &LshParams {
        &self.params
    }

    pub fn points(&self) -> &[BitVector] {
        &self.points
    }

    /// Query one replica: scan its tables, examine at most 2*ell candidates,
    /// return the first point within r2.
    pub fn query_replica(
        &self,
        replica: usize,
        query: &BitVector,
    ) -> Result<QueryOutcome, LshError> {
        if query.len() != self.params.real_dim {
            return Err(LshError::DimensionMismatch {
                expected: self.params.real_dim,
                got: query.len(),
            });
        }
        let budget = 2 * self.params.ell;
        let mut examined = 0u32;
        for table in &self.replicas[replica].tables {
            let tuple = sample_bits(query, &table.positions);
            let key = reduce_tuple(&self.reducer, &tuple);
            let Some(bucket) = table.buckets.get(&key) else {
                continue;
            };
            for &id in bucket {
                // The bucket key is a reduction; confirm the actual tuple
                // before spending a distance computation.
                if sample_bits(&self.points[id as usize], &table.positions) != tuple {
                    continue;
                }
                if examined == budget {
                    return Ok(QueryOutcome {
                        result: None,
                        candidates_examined: examined,
                    });
                }
                examined += 1;
                let distance = self.points[id as usize].hamming(query);
                if distance <= self.params.r2 {
                    return Ok(QueryOutcome {
                        result: Some((id as usize, distance)),
                        candidates_examined: examined,
                    });
                }
            }
        }
        Ok(QueryOutcome {
            result: None,
            candidates_examined: examined,
        })
    }

    /// Query every replica in order until one succeeds.
    pub fn query(&self, query: &BitVector) -> Result<QueryOutcome, LshError> {
        let mut examined = 0u32;
        for replica in 0..self.replicas.len() {
            let outcome = self.query_replica(replica, query)?;
            examined += outcome.candidates_examined;
            if outcome.result.is_some() {
                return Ok(QueryOutcome {
                    result: outcome.result,
                    candidates_examined: examined,
                });
            }
        }
        Ok(QueryOutcome {
            result: None,
            candidates_examined: examined,
        })
    }

    pub fn replica_count(&self) -> usize {
        self.replicas.len()
    }
}

/// Bits of `point` at `positions`, packed little-endian; virtual padding
/// positions read as zero.
fn sample_bits(point: &BitVector, positions: &[u32]) -> Vec<u64> {
    let mut words = vec![0u64; positions.len().div_ceil(64)];
    for (i, &pos) in positions.iter().enumerate() {
        let bit = (pos as usize) < point.len() && point.get(pos as usize);
        if bit {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

/// Fold a packed tuple into one bucket key; collisions are resolved by the
/// caller comparing tuples.
fn reduce_tuple(reducer: &HashFunctionHandle, words: &[u64]) -> u64 {
    let mut key = 0u64;
    for &word in words {
        key = reducer.eval((key ^ word) & ((1u64 << 62) - 1));
    }
    key
}

/// Approximate nearest-neighbor index: a ladder of radius-pair indexes at
/// radii growing by (1+epsilon), probed by binary search.
#[derive(Debug, Clone)]
pub struct NnsIndex {
    rungs: Vec<PlebIndex>,
    epsilon: f64,
}

impl NnsIndex {
    pub fn build(
        src: &mut RandomSource,
        points: Vec<BitVector>,
        epsilon: f64,
        delta: f64,
    ) -> Result<Self, LshError> {
        if points.is_empty() {
            return Err(LshError::EmptyDataset);
        }
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(LshError::InvalidDelta);
        }
        let dim = points[0].len();
        // Radius rungs 1, (1+eps), (1+eps)^2, ... up to the diameter.
        let mut radii = Vec::new();
        let mut r = 1.0f64;
        while (r as u32) < dim as u32 {
            let r1 = r.round() as u32;
            let r2 = ((r * (1.0 + epsilon)).round() as u32).min(dim as u32);
            if r2 > r1 && radii.last() != Some(&(r1, r2)) {
                radii.push((r1, r2));
            }
            r *= 1.0 + epsilon;
        }
        let rung_count = radii.len().max(1);
        let delta_per_rung = delta / rung_count as f64;
        let mut rungs = Vec::with_capacity(rung_count);
        for (r1, r2) in radii {
            rungs.push(PlebIndex::build(
                src,
                points.clone(),
                r1,
                r2,
                delta_per_rung,
            )?);
        }
        if rungs.is_empty() {
            // Degenerate dimension; a single permissive rung.
            rungs.push(PlebIndex::build(src, points, 1, dim as u32, delta)?);
        }
        Ok(NnsIndex { rungs, epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rung_count(&self) -> usize {
        self.rungs.len()
    }

    /// Binary search for the smallest rung that answers; returns its point.
    pub fn query(&self, query: &BitVector) -> Result<Option<(usize, u32)>, LshError> {
        let mut best: Option<(usize, u32)> = None;
        let mut lo = 0usize;
        let mut hi = self.rungs.len();
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            match self.rungs[mid].query(query)?.result {
                Some(hit) => {
                    if best.is_none_or(|(_, d)| hit.1 < d) {
                        best = Some(hit);
                    }
                    hi = mid;
                }
                None => lo = mid + 1,
            }
        }
        Ok(best)
    }
}

/// Unary threshold embedding of a vector in [0,1]^d: coordinate x
/// contributes `resolution` bits, the j-th set when x > j/resolution.
/// Hamming distance between embeddings approximates resolution * l1
/// distance to within one cell per coordinate.
pub fn l1_embed(v: &[f64], resolution: usize) -> Result<BitVector, LshError> {
    if resolution == 0 {
        return Err(LshError::InvalidResolution);
    }
    let mut bits = BitVector::zeros(v.len() * resolution);
    for (i, &x) in v.iter().enumerate() {
        if !(0.0..=1.0).contains(&x) {
            return Err(LshError::CoordinateOutOfRange(x));
        }
        for j in 0..resolution {
            if x > j as f64 / resolution as f64 {
                bits.set(i * resolution + j, true);
            }
        }
    }
    Ok(bits)
}

/// Dataset loader: one vector of '0'/'1' characters per line.
pub fn parse_hamming_dataset(text: &str) -> Result<Vec<BitVector>, LshError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        out.push(BitVector::from_01_str(line)?);
    }
    if out.is_empty() {
        return Err(LshError::EmptyDataset);
    }
    Ok(out)
}

/// Dataset loader: one vector of space-separated decimals in [0,1] per line.
pub fn parse_l1_dataset(text: &str) -> Result<Vec<Vec<f64>>, LshError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| LshError::Parse(format!("bad coordinate {f:?}")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        out.push(row);
    }
    if out.is_empty() {
        return Err(LshError::EmptyDataset);
    }
    Ok(out)
}

/// Result line format shared with the CLI: `query_id point_id distance`,
/// with `-` standing in when nothing was found.
pub fn format_query_result(query_id: usize, result: Option<(usize, u32)>) -> String {
    match result {
        Some((point_id, distance)) => format!("{query_id} {point_id} {distance}"),
        None => format!("{query_id} - -"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_vector_basics() {
        let mut v = BitVector::zeros(130);
        assert_eq!(v.len(), 130);
        v.set(0, true);
        v.set(129, true);
        assert!(v.get(0) && v.get(129) && !v.get(64));
        let w = BitVector::zeros(130);
        assert_eq!(v.hamming(&w), 2);
        v.flip(0);
        assert_eq!(v.hamming(&w), 1);

        let parsed = BitVector::from_01_str("0110").unwrap();
        assert!(!parsed.get(0) && parsed.get(1) && parsed.get(2) && !parsed.get(3));
        assert!(BitVector::from_01_str("01x").is_err());
    }

    #[test]
    fn sampled_bit_collision_probability() {
        // A single sampled coordinate collides on a pair at distance r with
        // probability exactly 1 - r/d.
        let d = 200usize;
        let mut src = RandomSource::new(1);
        for r in [10u32, 50, 120] {
            let a = BitVector::random(&mut src, d);
            let mut b = a.clone();
            let mut flipped = std::collections::HashSet::new();
            while flipped.len() < r as usize {
                let pos = src.uniform_below(d as u64, Method::Rejection) as usize;
                if flipped.insert(pos) {
                    b.flip(pos);
                }
            }
            assert_eq!(a.hamming(&b), r);
            let trials = 40_000u64;
            let mut collisions = 0u64;
            for _ in 0..trials {
                let pos = src.uniform_below(d as u64, Method::Rejection) as usize;
                if a.get(pos) == b.get(pos) {
                    collisions += 1;
                }
            }
            let observed = collisions as f64 / trials as f64;
            let expected = 1.0 - r as f64 / d as f64;
            let se = (expected * (1.0 - expected) / trials as f64).sqrt();
            assert!(
                (observed - expected).abs() <= 3.0 * se,
                "r={r}: observed {observed}, expected {expected}"
            );
        }
    }

    #[test]
    fn params_reject_bad_inputs() {
        assert!(compute_params(64, 0, 4, 8, 0.1).is_err());
        assert!(compute_params(64, 10, 8, 8, 0.1).is_err());
        assert!(compute_params(64, 10, 8, 80, 0.1).is_err());
        assert!(compute_params(64, 10, 4, 8, 0.0).is_err());
    }

    #[test]
    fn identical_points_always_collide() {
        // r = 0 distance pairs collide with probability 1 per sampled bit,
        // so a stored point equal to the query is found immediately.
        let mut src = RandomSource::new(2);
        let points: Vec<BitVector> = (0..32).map(|_| BitVector::random(&mut src, 64)).collect();
        let target = points[7].clone();
        let index = PlebIndex::build(&mut src, points, 4, 16, 0.1).unwrap();
        let outcome = index.query(&target).unwrap();
        let (id, distance) = outcome.result.expect("exact match must be found");
        assert_eq!(distance, 0);
        assert_eq!(index.points()[id], target);
    }

    #[test]
    fn padding_rule_controls_table_count() {
        // r1/d = 16/64 = 0.25 >= 1/ln(1024), so the build pads with
        // ceil(d ln n) junk bits, after which ell <= ceil(e * n^(1/(1+eps)))
        // with eps = r2/r1 - 1 = 1.
        let n = 1024usize;
        let params = compute_params(64, n, 16, 32, 0.1).unwrap();
        assert_eq!(params.dim, 64 + (64.0f64 * (n as f64).ln()).ceil() as usize);
        assert!((params.r1 as f64) / (params.dim as f64) < 1.0 / (n as f64).ln());
        let bound = (std::f64::consts::E * (n as f64).powf(0.5)).ceil() as u32;
        assert!(params.ell <= bound, "ell {} > {bound}", params.ell);

        // Small radii on a wide vector need no padding.
        let unpadded = compute_params(4096, n, 16, 32, 0.1).unwrap();
        assert_eq!(unpadded.dim, 4096);
    }

    #[test]
    fn single_point_dataset() {
        let mut src = RandomSource::new(3);
        let point = BitVector::random(&mut src, 64);
        let index = PlebIndex::build(&mut src, vec![point.clone()], 2, 8, 0.1).unwrap();
        let outcome = index.query(&point).unwrap();
        assert_eq!(outcome.result.map(|(id, _)| id), Some(0));
    }

    #[test]
    fn far_only_dataset_returns_nothing_within_budget() {
        let mut src = RandomSource::new(4);
        let d = 256usize;
        let base = BitVector::random(&mut src, d);
        // All points at distance ~d/2 from the query, far beyond r2 = 16.
        let points: Vec<BitVector> = (0..128).map(|_| BitVector::random(&mut src, d)).collect();
        let index = PlebIndex::build(&mut src, points, 8, 16, 0.1).unwrap();
        for replica in 0..index.replica_count() {
            let outcome = index.query_replica(replica, &base).unwrap();
            assert!(outcome.result.is_none());
            assert!(outcome.candidates_examined <= 2 * index.params().ell);
        }
    }

    #[test]
    fn planted_neighbor_is_recovered() {
        let mut src = RandomSource::new(5);
        let d = 128usize;
        let n = 255usize;
        let mut points: Vec<BitVector> = (0..n).map(|_| BitVector::random(&mut src, d)).collect();
        let planted = BitVector::random(&mut src, d);
        points.push(planted.clone());
        let r1 = 8u32;
        let index = PlebIndex::build(&mut src, points, r1, 24, 0.05).unwrap();

        let mut per_replica_successes = 0u64;
        let mut per_replica_samples = 0u64;
        let mut full_successes = 0u64;
        let queries = 60;
        for _ in 0..queries {
            let mut query = planted.clone();
            let mut flipped = std::collections::HashSet::new();
            while flipped.len() < r1 as usize {
                let pos = src.uniform_below(d as u64, Method::Rejection) as usize;
                if flipped.insert(pos) {
                    query.flip(pos);
                }
            }
            for replica in 0..index.replica_count() {
                let outcome = index.query_replica(replica, &query).unwrap();
                per_replica_samples += 1;
                assert!(outcome.candidates_examined <= 2 * index.params().ell);
                if let Some((_, distance)) = outcome.result {
                    assert!(distance <= index.params().r2);
                    per_replica_successes += 1;
                }
            }
            if index.query(&query).unwrap().result.is_some() {
                full_successes += 1;
            }
        }
        let replica_rate = per_replica_successes as f64 / per_replica_samples as f64;
        assert!(
            replica_rate >= 1.0 - REPLICA_FAILURE_BOUND,
            "replica success rate {replica_rate}"
        );
        let full_rate = full_successes as f64 / queries as f64;
        assert!(
            full_rate >= 1.0 - 0.05,
            "aggregate success rate {full_rate}"
        );
    }

    #[test]
    fn l1_embedding_basics() {
        assert!(l1_embed(&[0.5], 0).is_err());
        assert!(l1_embed(&[1.5], 4).is_err());
        let zeros = l1_embed(&[0.0, 0.0], 4).unwrap();
        assert_eq!(zeros.hamming(&BitVector::zeros(8)), 0);
        // x = 0.5 at resolution 4 crosses thresholds 0 and 1/4: two ones.
        let half = l1_embed(&[0.5], 4).unwrap();
        assert_eq!(half.hamming(&BitVector::zeros(4)), 2);
    }

    #[test]
    fn l1_embedding_distance_bound() {
        let mut src = RandomSource::new(6);
        let d = 8usize;
        let resolution = 32usize;
        for _ in 0..200 {
            let u: Vec<f64> = (0..d).map(|_| src.uniform_f64()).collect();
            let v: Vec<f64> = (0..d).map(|_| src.uniform_f64()).collect();
            let eu = l1_embed(&u, resolution).unwrap();
            let ev = l1_embed(&v, resolution).unwrap();
            let l1: f64 = u.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            let scaled = eu.hamming(&ev) as f64 / resolution as f64;
            assert!(
                (scaled - l1).abs() <= d as f64 / resolution as f64,
                "scaled {scaled}, l1 {l1}"
            );
        }
    }

    #[test]
    fn nns_ladder_returns_near_optimal_neighbors() {
        let mut src = RandomSource::new(7);
        let d = 96usize;
        let points: Vec<BitVector> = (0..200).map(|_| BitVector::random(&mut src, d)).collect();
        let index = NnsIndex::build(&mut src, points.clone(), 1.0, 0.05).unwrap();
        assert!(index.rung_count() >= 4);

        // A stored point queries to itself at the bottom rung.
        let exact = index.query(&points[11]).unwrap();
        assert_eq!(exact, Some((11, 0)));

        let mut within_factor = 0usize;
        let queries = 40;
        for _ in 0..queries {
            let mut q = points[src.uniform_below(200, Method::Rejection) as usize].clone();
            for _ in 0..6 {
                q.flip(src.uniform_below(d as u64, Method::Rejection) as usize);
            }
            let best = points.iter().map(|p| p.hamming(&q)).min().unwrap();
            if let Some((_, found)) = index.query(&q).unwrap() {
                // (1+eps)-approximation plus rung rounding.
                if found as f64 <= (1.0 + index.epsilon()) * best.max(1) as f64 + 1.0 {
                    within_factor += 1;
                }
            }
        }
        assert!(
            within_factor >= (0.95 * queries as f64 - 3.0) as usize,
            "{within_factor}/{queries}"
        );
    }

    #[test]
    fn singleton_nns() {
        let mut src = RandomSource::new(8);
        let point = BitVector::random(&mut src, 64);
        let index = NnsIndex::build(&mut src, vec![point.clone()], 0.5, 0.1).unwrap();
        let mut q = point.clone();
        q.flip(3);
        let found = index.query(&q).unwrap();
        assert_eq!(found.map(|(id, _)| id), Some(0));
    }

    #[test]
    fn dataset_parsers() {
        let bits = parse_hamming_dataset("0101\n1100\n\n").unwrap();
        assert_eq!(bits.len(), 2);
        assert!(parse_hamming_dataset("").is_err());
        assert!(parse_hamming_dataset("01a1").is_err());

        let vecs = parse_l1_dataset("0.5 0.25\n1.0 0.0\n").unwrap();
        assert_eq!(vecs, vec![vec![0.5, 0.25], vec![1.0, 0.0]]);
        assert!(parse_l1_dataset("0.5 snack").is_err());

        assert_eq!(format_query_result(3, Some((7, 12))), "3 7 12");
        assert_eq!(format_query_result(4, None), "4 - -");
    }

    #[test]
    fn mismatched_query_dimension_errors() {
        let mut src = RandomSource::new(9);
        let points = vec![BitVector::random(&mut src, 64)];
        let index = PlebIndex::build(&mut src, points, 2, 8, 0.1).unwrap();
        let q = BitVector::zeros(32);
        assert!(matches!(
            index.query(&q),
            Err(LshError::DimensionMismatch { .. })
        ));
    }
}
