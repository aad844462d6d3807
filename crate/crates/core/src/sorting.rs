//! Instrumented randomized sorting and selection.
//!
//! Both operations pick pivots uniformly at random through the shared
//! [`RandomSource`] and count exactly one comparison per non-pivot element
//! per partition round, so observed counts line up with the closed-form
//! expectations the harness checks.

use crate::rng::{Method, RandomSource};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SortError {
    #[error("input contains duplicate keys")]
    DuplicateKeys,
    #[error("rank {k} out of range for {n} elements")]
    RankOutOfRange { k: usize, n: usize },
}

/// Result of one instrumented run.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTrace<T> {
    pub n: usize,
    pub comparisons: u64,
    pub output: T,
}

/// Randomized quicksort over distinct keys.
pub fn quicksort<K: Ord + Clone>(
    src: &mut RandomSource,
    items: &[K],
) -> Result<ComparisonTrace<Vec<K>>, SortError> {
    let mut buf: Vec<K> = items.to_vec();
    let mut comparisons = 0u64;
    sort_range(&mut buf, 0, items.len(), src, &mut comparisons)?;
    Ok(ComparisonTrace {
        n: items.len(),
        comparisons,
        output: buf,
    })
}

fn sort_range<K: Ord>(
    buf: &mut [K],
    mut lo: usize,
    mut hi: usize,
    src: &mut RandomSource,
    comparisons: &mut u64,
) -> Result<(), SortError> {
    // Recurse on the smaller side, loop on the larger.
    while hi - lo > 1 {
        let split = partition(buf, lo, hi, src, comparisons)?;
        if split - lo < hi - split - 1 {
            sort_range(buf, lo, split, src, comparisons)?;
            lo = split + 1;
        } else {
            sort_range(buf, split + 1, hi, src, comparisons)?;
            hi = split;
        }
    }
    Ok(())
}

/// Partition `buf[lo..hi]` around a uniformly random pivot; returns the
/// pivot's final position. Costs exactly `hi - lo - 1` comparisons.
fn partition<K: Ord>(
    buf: &mut [K],
    lo: usize,
    hi: usize,
    src: &mut RandomSource,
    comparisons: &mut u64,
) -> Result<usize, SortError> {
    let len = hi - lo;
    let choice = lo + src.uniform_below(len as u64, Method::Rejection) as usize;
    buf.swap(lo, choice);
    let mut boundary = lo;
    for probe in lo + 1..hi {
        *comparisons += 1;
        match buf[probe].cmp(&buf[lo]) {
            std::cmp::Ordering::Less => {
                boundary += 1;
                buf.swap(boundary, probe);
            }
            std::cmp::Ordering::Equal => return Err(SortError::DuplicateKeys),
            std::cmp::Ordering::Greater => {}
        }
    }
    buf.swap(lo, boundary);
    Ok(boundary)
}

/// Randomized selection of the k-th smallest element (1-based rank).
///
/// Recurses only into the side that holds the target; when the pivot lands
/// exactly on the requested rank it is returned with no further comparisons.
pub fn quickselect<K: Ord + Clone>(
    src: &mut RandomSource,
    items: &[K],
    k: usize,
) -> Result<ComparisonTrace<K>, SortError> {
    let n = items.len();
    if k < 1 || k > n {
        return Err(SortError::RankOutOfRange { k, n });
    }
    let mut buf: Vec<K> = items.to_vec();
    let mut comparisons = 0u64;
    let mut lo = 0usize;
    let mut hi = n;
    let target = k - 1; // 0-based rank within the full array
    loop {
        if hi - lo == 1 {
            return Ok(ComparisonTrace {
                n,
                comparisons,
                output: buf[lo].clone(),
            });
        }
        let split = partition(&mut buf, lo, hi, src, &mut comparisons)?;
        match target.cmp(&split) {
            std::cmp::Ordering::Equal => {
                return Ok(ComparisonTrace {
                    n,
                    comparisons,
                    output: buf[split].clone(),
                });
            }
            std::cmp::Ordering::Less => hi = split,
            std::cmp::Ordering::Greater => lo = split + 1,
        }
    }
}

/// Exact expected quicksort comparisons by the total-probability recurrence;
/// an independent check for the closed form used by the harness.
pub fn expected_quicksort_comparisons(n: usize) -> f64 {
    let mut table = vec![0.0f64; n + 1];
    for size in 2..=n {
        let sum: f64 = table[..size].iter().sum();
        table[size] = (size - 1) as f64 + 2.0 * sum / size as f64;
    }
    table[n]
}
