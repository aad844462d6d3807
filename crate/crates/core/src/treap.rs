//! Treap ordered dictionary: a search tree on keys that is simultaneously a
//! heap on random priorities.
//!
//! Priorities are 64-bit uniform words, so the shape is a deterministic
//! function of the (key, priority) set regardless of insertion order; ties
//! (probability about n^2 / 2^64) break toward the incumbent node and are
//! flagged in the stats.
//!
//! Rotation accounting: inserts count rotations actually performed. Deletes
//! report the full sink-to-leaf count, the sum of the right spine of the
//! left subtree and the left spine of the right subtree, even though the
//! structural path prunes as soon as the node has at most one child; the
//! spine sum is the quantity with an exact expectation, 2 - 1/l - 1/(n-l+1)
//! for rank l among n keys.

use crate::rng::RandomSource;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TreapError {
    #[error("key already present")]
    DuplicateKey,
    #[error("key not present")]
    MissingKey,
    #[error("merge requires every left key below every right key")]
    OverlappingRanges,
}

type Link<K> = Option<Box<Node<K>>>;

#[derive(Debug, Clone)]
struct Node<K> {
    key: K,
    priority: u64,
    left: Link<K>,
    right: Link<K>,
}

impl<K> Node<K> {
    fn new(key: K, priority: u64) -> Box<Self> {
        Box::new(Node {
            key,
            priority,
            left: None,
            right: None,
        })
    }
}

/// Cumulative instrumentation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TreapStats {
    pub rotations: u64,
    pub key_comparisons: u64,
    pub priority_ties: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOutcome {
    pub found: bool,
    /// Edges from the root to where the walk stopped.
    pub depth: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Treap<K: Ord> {
    root: Link<K>,
    len: usize,
    stats: TreapStats,
}

impl<K: Ord> Treap<K> {
    pub fn new() -> Self {
        Treap {
            root: None,
            len: 0,
            stats: TreapStats::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn stats(&self) -> TreapStats {
        self.stats
    }

    /// Insert with a priority drawn from the source; returns the number of
    /// rotations used to float the new leaf up.
    pub fn insert(&mut self, key: K, src: &mut RandomSource) -> Result<u64, TreapError> {
        let priority = src.uniform_u64();
        self.insert_with_priority(key, priority)
    }

    /// Insert with a caller-chosen priority. Rebuilding from the same
    /// (key, priority) set yields the same shape whatever the order.
    pub fn insert_with_priority(&mut self, key: K, priority: u64) -> Result<u64, TreapError> {
        let mut rotations = 0u64;
        let mut ties = 0u64;
        let mut comparisons = 0u64;
        insert_rec(
            &mut self.root,
            key,
            priority,
            &mut rotations,
            &mut ties,
            &mut comparisons,
        )?;
        self.len += 1;
        self.stats.rotations += rotations;
        self.stats.priority_ties += ties;
        self.stats.key_comparisons += comparisons;
        Ok(rotations)
    }

    /// Remove a key; returns the sink-to-leaf rotation count (spine sum).
    pub fn delete(&mut self, key: &K) -> Result<u64, TreapError> {
        let spine_sum = {
            let node = find(&self.root, key).ok_or(TreapError::MissingKey)?;
            right_spine_len(&node.left) + left_spine_len(&node.right)
        };
        delete_rec(&mut self.root, key, &mut self.stats.priority_ties)?;
        self.len -= 1;
        self.stats.rotations += spine_sum;
        Ok(spine_sum)
    }

    pub fn search(&self, key: &K) -> SearchOutcome {
        let mut edges = 0usize;
        let mut cursor = &self.root;
        while let Some(node) = cursor {
            match key.cmp(&node.key) {
                std::cmp::Ordering::Equal => {
                    return SearchOutcome {
                        found: true,
                        depth: edges,
                    }
                }
                std::cmp::Ordering::Less => cursor = &node.left,
                std::cmp::Ordering::Greater => cursor = &node.right,
            }
            if cursor.is_some() {
                edges += 1;
            }
        }
        SearchOutcome {
            found: false,
            depth: edges,
        }
    }

    pub fn contains(&self, key: &K) -> bool {
        self.search(key).found
    }

    /// Split around a present pivot: keys below it and keys above it, with
    /// the pivot discarded. Charges the pivot's depth to the rotation
    /// counter, the cost of floating it to the root.
    pub fn split(mut self, pivot: &K) -> Result<(Treap<K>, Treap<K>), TreapError> {
        let outcome = self.search(pivot);
        if !outcome.found {
            return Err(TreapError::MissingKey);
        }
        let (left_link, right_link) = split_rec(self.root.take(), pivot);
        let mut left = Treap {
            root: left_link,
            len: 0,
            stats: self.stats,
        };
        left.stats.rotations += outcome.depth as u64;
        left.len = count(&left.root);
        let mut right = Treap::new();
        right.root = right_link;
        right.len = count(&right.root);
        Ok((left, right))
    }

    /// Merge two treaps with disjoint, ordered key ranges.
    pub fn merge(mut left: Treap<K>, mut right: Treap<K>) -> Result<Treap<K>, TreapError> {
        if let (Some(lmax), Some(rmin)) = (max_key(&left.root), min_key(&right.root)) {
            if lmax >= rmin {
                return Err(TreapError::OverlappingRanges);
            }
        }
        let len = left.len + right.len;
        let stats = TreapStats {
            rotations: left.stats.rotations + right.stats.rotations,
            key_comparisons: left.stats.key_comparisons + right.stats.key_comparisons,
            priority_ties: left.stats.priority_ties + right.stats.priority_ties,
        };
        let root = merge_rec(left.root.take(), right.root.take());
        Ok(Treap { root, len, stats })
    }

    /// In-order key sequence.
    pub fn keys(&self) -> Vec<&K> {
        let mut out = Vec::with_capacity(self.len);
        collect_keys(&self.root, &mut out);
        out
    }

    /// Verify the search-tree and heap invariants by full traversal.
    pub fn validate(&self) -> Result<(), String> {
        let mut count = 0usize;
        validate_rec(&self.root, None, None, &mut count)?;
        if count != self.len {
            return Err(format!("len {} but {} nodes", self.len, count));
        }
        Ok(())
    }
}

impl<K: Ord + std::fmt::Display> Treap<K> {
    /// Canonical pre-order dump `(key priority left right)` for shape comparison.
    pub fn shape_string(&self) -> String {
        fn walk<K: Ord + std::fmt::Display>(link: &Link<K>, out: &mut String) {
            match link {
                None => out.push('-'),
                Some(node) => {
                    out.push('(');
                    out.push_str(&format!("{} {} ", node.key, node.priority));
                    walk(&node.left, out);
                    out.push(' ');
                    walk(&node.right, out);
                    out.push(')');
                }
            }
        }
        let mut out = String::new();
        walk(&self.root, &mut out);
        out
    }
}

fn insert_rec<K: Ord>(
    link: &mut Link<K>,
    key: K,
    priority: u64,
    rotations: &mut u64,
    ties: &mut u64,
    comparisons: &mut u64,
) -> Result<(), TreapError> {
    match link {
        None => {
            *link = Some(Node::new(key, priority));
            Ok(())
        }
        Some(node) => {
            *comparisons += 1;
            match key.cmp(&node.key) {
                std::cmp::Ordering::Equal => Err(TreapError::DuplicateKey),
                std::cmp::Ordering::Less => {
                    insert_rec(&mut node.left, key, priority, rotations, ties, comparisons)?;
                    let child_priority = node.left.as_ref().unwrap().priority;
                    if child_priority == node.priority {
                        *ties += 1;
                    }
                    if child_priority > node.priority {
                        rotate_right(link);
                        *rotations += 1;
                    }
                    Ok(())
                }
                std::cmp::Ordering::Greater => {
                    insert_rec(&mut node.right, key, priority, rotations, ties, comparisons)?;
                    let child_priority = node.right.as_ref().unwrap().priority;
                    if child_priority == node.priority {
                        *ties += 1;
                    }
                    if child_priority > node.priority {
                        rotate_left(link);
                        *rotations += 1;
                    }
                    Ok(())
                }
            }
        }
    }
}

fn rotate_right<K: Ord>(link: &mut Link<K>) {
    let mut node = link.take().expect("rotate on empty link");
    let mut new_root = node.left.take().expect("right rotation needs a left child");
    node.left = new_root.right.take();
    new_root.right = Some(node);
    *link = Some(new_root);
}

fn rotate_left<K: Ord>(link: &mut Link<K>) {
    let mut node = link.take().expect("rotate on empty link");
    let mut new_root = node
        .right
        .take()
        .expect("left rotation needs a right child");
    node.right = new_root.left.take();
    new_root.left = Some(node);
    *link = Some(new_root);
}

fn delete_rec<K: Ord>(link: &mut Link<K>, key: &K, ties: &mut u64) -> Result<(), TreapError> {
    let node = link.as_mut().ok_or(TreapError::MissingKey)?;
    match key.cmp(&node.key) {
        std::cmp::Ordering::Less => delete_rec(&mut node.left, key, ties),
        std::cmp::Ordering::Greater => delete_rec(&mut node.right, key, ties),
        std::cmp::Ordering::Equal => {
            sink_and_prune(link, ties);
            Ok(())
        }
    }
}

/// Rotate the target down by swapping with its higher-priority child until
/// it has at most one child, then splice it out.
fn sink_and_prune<K: Ord>(link: &mut Link<K>, ties: &mut u64) {
    enum Shape {
        AtMostOneChild,
        LeftWins(bool),
    }
    let shape = {
        let node = link.as_ref().expect("sink on empty link");
        match (&node.left, &node.right) {
            (Some(left), Some(right)) => {
                if left.priority == right.priority {
                    *ties += 1;
                }
                Shape::LeftWins(left.priority > right.priority)
            }
            _ => Shape::AtMostOneChild,
        }
    };
    match shape {
        Shape::AtMostOneChild => {
            let mut node = link.take().unwrap();
            *link = node.left.take().or_else(|| node.right.take());
        }
        Shape::LeftWins(true) => {
            rotate_right(link);
            sink_and_prune(&mut link.as_mut().unwrap().right, ties);
        }
        Shape::LeftWins(false) => {
            rotate_left(link);
            sink_and_prune(&mut link.as_mut().unwrap().left, ties);
        }
    }
}

fn find<'a, K: Ord>(link: &'a Link<K>, key: &K) -> Option<&'a Node<K>> {
    let mut cursor = link;
    while let Some(node) = cursor {
        match key.cmp(&node.key) {
            std::cmp::Ordering::Equal => return Some(node),
            std::cmp::Ordering::Less => cursor = &node.left,
            std::cmp::Ordering::Greater => cursor = &node.right,
        }
    }
    None
}

/// Nodes reached from the subtree root by following only right links.
fn right_spine_len<K>(link: &Link<K>) -> u64 {
    let mut len = 0;
    let mut cursor = link;
    while let Some(node) = cursor {
        len += 1;
        cursor = &node.right;
    }
    len
}

fn left_spine_len<K>(link: &Link<K>) -> u64 {
    let mut len = 0;
    let mut cursor = link;
    while let Some(node) = cursor {
        len += 1;
        cursor = &node.left;
    }
    len
}

/// Split into (keys < pivot, keys > pivot), dropping the pivot node.
fn split_rec<K: Ord>(link: Link<K>, pivot: &K) -> (Link<K>, Link<K>) {
    match link {
        None => (None, None),
        Some(mut node) => match pivot.cmp(&node.key) {
            std::cmp::Ordering::Equal => (node.left.take(), node.right.take()),
            std::cmp::Ordering::Less => {
                let (l, r) = split_rec(node.left.take(), pivot);
                node.left = r;
                (l, Some(node))
            }
            std::cmp::Ordering::Greater => {
                let (l, r) = split_rec(node.right.take(), pivot);
                node.right = l;
                (Some(node), r)
            }
        },
    }
}

fn merge_rec<K: Ord>(left: Link<K>, right: Link<K>) -> Link<K> {
    match (left, right) {
        (None, r) => r,
        (l, None) => l,
        (Some(mut l), Some(mut r)) => {
            if l.priority >= r.priority {
                l.right = merge_rec(l.right.take(), Some(r));
                Some(l)
            } else {
                r.left = merge_rec(Some(l), r.left.take());
                Some(r)
            }
        }
    }
}

fn count<K>(link: &Link<K>) -> usize {
    match link {
        None => 0,
        Some(node) => 1 + count(&node.left) + count(&node.right),
    }
}

fn max_key<K>(link: &Link<K>) -> Option<&K> {
    let mut cursor = link.as_ref()?;
    while let Some(right) = cursor.right.as_ref() {
        cursor = right;
    }
    Some(&cursor.key)
}

fn min_key<K>(link: &Link<K>) -> Option<&K> {
    let mut cursor = link.as_ref()?;
    while let Some(left) = cursor.left.as_ref() {
        cursor = left;
    }
    Some(&cursor.key)
}

fn collect_keys<'a, K: Ord>(link: &'a Link<K>, out: &mut Vec<&'a K>) {
    if let Some(node) = link {
        collect_keys(&node.left, out);
        out.push(&node.key);
        collect_keys(&node.right, out);
    }
}

fn validate_rec<K: Ord>(
    link: &Link<K>,
    min: Option<&K>,
    max: Option<&K>,
    count: &mut usize,
) -> Result<(), String> {
    let Some(node) = link else { return Ok(()) };
    *count += 1;
    if let Some(lo) = min {
        if node.key <= *lo {
            return Err("search-tree order violated".into());
        }
    }
    if let Some(hi) = max {
        if node.key >= *hi {
            return Err("search-tree order violated".into());
        }
    }
    for c in [&node.left, &node.right].into_iter().flatten() {
        if c.priority > node.priority {
            return Err("heap order violated".into());
        }
    }
    validate_rec(&node.left, min, Some(&node.key), count)?;
    validate_rec(&node.right, Some(&node.key), max, count)
}
