//! Skip list with tunable promotion probability.
//!
//! Each element occupies a tower of forward links whose height is sampled
//! one biased coin per level (promote with probability `p`), so the height
//! is geometric with mean 1/(1-p) and the bit accounting of the shared
//! source stays exact. Heights are capped at 1 + ceil(log_{1/p} capacity) + 16.
//!
//! Search walks top-down; the instrumentation counts every forward link
//! followed, including the final step onto a found key. Split and merge cut
//! or recreate only the links crossing the boundary, counted in
//! `boundary_link_mutations`.

use crate::rng::RandomSource;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SkipListError {
    #[error("promotion probability must satisfy 0 <= p < 1, got {0}")]
    InvalidProbability(f64),
    #[error("key already present")]
    DuplicateKey,
    #[error("key not present")]
    MissingKey,
    #[error("merge requires every left key below every right key")]
    OverlappingRanges,
}

#[derive(Debug, Clone)]
struct Node<K> {
    key: K,
    forward: Vec<Option<usize>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SkipListStats {
    pub links_traversed: u64,
    /// Links cut or recreated by split/merge surgery.
    pub boundary_link_mutations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOutcome {
    pub found: bool,
    pub links_traversed: u64,
}

#[derive(Debug, Clone)]
pub struct SkipList<K: Ord> {
    arena: Vec<Option<Node<K>>>,
    free: Vec<usize>,
    head: Vec<Option<usize>>,
    p: f64,
    max_height: usize,
    len: usize,
    stats: SkipListStats,
}

#[derive(Debug, Clone, Copy)]
enum Pred {
    Head,
    Node(usize),
}

impl<K: Ord> SkipList<K> {
    /// `p` is the per-level promotion probability; `capacity_hint` sizes the
    /// height cap.
    pub fn new(p: f64, capacity_hint: u64) -> Result<Self, SkipListError> {
        if !(0.0..1.0).contains(&p) {
            return Err(SkipListError::InvalidProbability(p));
        }
        let max_height = if p == 0.0 {
            1
        } else {
            let levels = (capacity_hint.max(2) as f64).ln() / (1.0 / p).ln();
            (1.0 + levels.ceil() + 16.0).min(64.0) as usize
        };
        Ok(SkipList {
            arena: Vec::new(),
            free: Vec::new(),
            head: vec![None; max_height],
            p,
            max_height,
            len: 0,
            stats: SkipListStats::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn stats(&self) -> SkipListStats {
        self.stats
    }

    fn node(&self, idx: usize) -> &Node<K> {
        self.arena[idx].as_ref().expect("live node")
    }

    fn forward_of(&self, pred: Pred, level: usize) -> Option<usize> {
        match pred {
            Pred::Head => self.head[level],
            Pred::Node(idx) => self.node(idx).forward[level],
        }
    }

    fn set_forward(&mut self, pred: Pred, level: usize, target: Option<usize>) {
        match pred {
            Pred::Head => self.head[level] = target,
            Pred::Node(idx) => self.arena[idx].as_mut().expect("live node").forward[level] = target,
        }
    }

    /// Predecessor of `key` at every level (the last node strictly below it).
    fn predecessors(&self, key: &K) -> Vec<Pred> {
        let mut preds = vec![Pred::Head; self.max_height];
        let mut cursor = Pred::Head;
        for level in (0..self.max_height).rev() {
            while let Some(next) = self.forward_of(cursor, level) {
                if self.node(next).key < *key {
                    cursor = Pred::Node(next);
                } else {
                    break;
                }
            }
            preds[level] = cursor;
        }
        preds
    }

    fn sample_height(&self, src: &mut RandomSource) -> usize {
        let mut height = 1;
        while height < self.max_height && src.bernoulli(self.p) {
            height += 1;
        }
        height
    }

    pub fn insert(&mut self, key: K, src: &mut RandomSource) -> Result<(), SkipListError> {
        let preds = self.predecessors(&key);
        if let Some(next) = self.forward_of(preds[0], 0) {
            if self.node(next).key == key {
                return Err(SkipListError::DuplicateKey);
            }
        }
        let height = self.sample_height(src);
        let idx = match self.free.pop() {
            Some(slot) => {
                self.arena[slot] = Some(Node {
                    key,
                    forward: vec![None; height],
                });
                slot
            }
            None => {
                self.arena.push(Some(Node {
                    key,
                    forward: vec![None; height],
                }));
                self.arena.len() - 1
            }
        };
        for (level, &pred) in preds.iter().enumerate().take(height) {
            let after = self.forward_of(pred, level);
            self.arena[idx].as_mut().unwrap().forward[level] = after;
            self.set_forward(pred, level, Some(idx));
        }
        self.len += 1;
        Ok(())
    }

    pub fn search(&mut self, key: &K) -> SearchOutcome {
        let mut links = 0u64;
        let mut cursor = Pred::Head;
        for level in (0..self.max_height).rev() {
            while let Some(next) = self.forward_of(cursor, level) {
                match self.node(next).key.cmp(key) {
                    std::cmp::Ordering::Less => {
                        cursor = Pred::Node(next);
                        links += 1;
                    }
                    std::cmp::Ordering::Equal => {
                        links += 1; // final step onto the match
                        self.stats.links_traversed += links;
                        return SearchOutcome {
                            found: true,
                            links_traversed: links,
                        };
                    }
                    std::cmp::Ordering::Greater => break,
                }
            }
        }
        self.stats.links_traversed += links;
        SearchOutcome {
            found: false,
            links_traversed: links,
        }
    }

    pub fn contains(&mut self, key: &K) -> bool {
        self.search(key).found
    }

    pub fn delete(&mut self, key: &K) -> Result<(), SkipListError> {
        let preds = self.predecessors(key);
        let target = match self.forward_of(preds[0], 0) {
            Some(next) if self.node(next).key == *key => next,
            _ => return Err(SkipListError::MissingKey),
        };
        let height = self.node(target).forward.len();
        for (level, &pred) in preds.iter().enumerate().take(height) {
            let after = self.node(target).forward[level];
            self.set_forward(pred, level, after);
        }
        self.arena[target] = None;
        self.free.push(target);
        self.len -= 1;
        Ok(())
    }

    /// Keys in order, with tower heights.
    pub fn keys_and_heights(&self) -> Vec<(&K, usize)> {
        let mut out = Vec::with_capacity(self.len);
        let mut cursor = self.head[0];
        while let Some(idx) = cursor {
            let node = self.node(idx);
            out.push((&node.key, node.forward.len()));
            cursor = node.forward[0];
        }
        out
    }

    /// Total forward links owned by elements (the space statistic).
    pub fn total_links(&self) -> u64 {
        self.keys_and_heights().iter().map(|(_, h)| *h as u64).sum()
    }

    pub fn max_tower_height(&self) -> usize {
        self.keys_and_heights()
            .iter()
            .map(|(_, h)| *h)
            .max()
            .unwrap_or(0)
    }

    /// Split into (keys < pivot, keys >= pivot). Only boundary links are cut
    /// and recreated; tower heights are untouched.
    pub fn split(mut self, pivot: &K) -> (SkipList<K>, SkipList<K>) {
        let preds = self.predecessors(pivot);
        let mut right = SkipList {
            arena: Vec::new(),
            free: Vec::new(),
            head: vec![None; self.max_height],
            p: self.p,
            max_height: self.max_height,
            len: 0,
            stats: SkipListStats::default(),
        };
        // Cut each crossing link and recreate it from the right head.
        for (level, &pred) in preds.iter().enumerate() {
            let crossing = self.forward_of(pred, level);
            if crossing.is_some() {
                right.head[level] = crossing;
                self.set_forward(pred, level, None);
                self.stats.boundary_link_mutations += 2;
            }
        }
        // Move right-side nodes into their own arena, preserving topology.
        let mut moved = Vec::new();
        let mut cursor = right.head[0];
        while let Some(idx) = cursor {
            moved.push(idx);
            cursor = self.node(idx).forward[0];
        }
        let mut remap = std::collections::HashMap::new();
        for (new_idx, &old_idx) in moved.iter().enumerate() {
            remap.insert(old_idx, new_idx);
        }
        for &old_idx in &moved {
            let mut node = self.arena[old_idx].take().expect("live node");
            self.free.push(old_idx);
            for slot in node.forward.iter_mut() {
                *slot = slot.map(|t| remap[&t]);
            }
            right.arena.push(Some(node));
        }
        for slot in right.head.iter_mut() {
            *slot = slot.map(|t| remap[&t]);
        }
        right.len = moved.len();
        self.len -= moved.len();
        (self, right)
    }

    /// Concatenate two lists with disjoint ordered key ranges by recreating
    /// the boundary links.
    pub fn merge(mut left: SkipList<K>, right: SkipList<K>) -> Result<SkipList<K>, SkipListError> {
        if let (Some((lmax, _)), Some((rmin, _))) = (
            left.keys_and_heights().last().copied(),
            right.keys_and_heights().first().copied(),
        ) {
            if lmax >= rmin {
                return Err(SkipListError::OverlappingRanges);
            }
        }
        let offset = left.arena.len();
        let target_height = left.max_height.max(right.max_height);
        left.head.resize(target_height, None);
        left.max_height = target_height;

        // Rightmost node of the left list at every level.
        let mut tail = vec![Pred::Head; target_height];
        let mut cursor = Pred::Head;
        for level in (0..left.head.len()).rev() {
            while let Some(next) = left.forward_of(cursor, level) {
                cursor = Pred::Node(next);
            }
            tail[level] = cursor;
        }

        let right_len = right.len;
        let recreated = right.head.iter().filter(|link| link.is_some()).count() as u64;
        // Append the right arena, shifting indices.
        for node in right.arena.into_iter().flatten() {
            let mut node = node;
            for slot in node.forward.iter_mut() {
                *slot = slot.map(|t| t + offset);
            }
            left.arena.push(Some(node));
        }
        for (level, head_link) in right.head.iter().enumerate() {
            if let Some(first) = head_link {
                left.set_forward(tail[level], level, Some(first + offset));
            }
        }
        left.len += right_len;
        left.stats.links_traversed += right.stats.links_traversed;
        left.stats.boundary_link_mutations += right.stats.boundary_link_mutations + recreated;
        Ok(left)
    }

    /// One line per level, keys in order, top level first.
    pub fn level_dump(&self) -> String
    where
        K: std::fmt::Display,
    {
        let mut out = String::new();
        for level in (0..self.max_height).rev() {
            let mut keys = Vec::new();
            let mut cursor = self.head[level];
            while let Some(idx) = cursor {
                let node = self.node(idx);
                keys.push(node.key.to_string());
                cursor = node.forward[level];
            }
            if keys.is_empty() && level > 0 {
                continue;
            }
            out.push_str(&format!("L{level}: {}\n", keys.join(" ")));
        }
        out
    }

    /// Verify sortedness and the level-subsequence property by traversal.
    pub fn validate(&self) -> Result<(), String> {
        let base: Vec<usize> = {
            let mut ids = Vec::new();
            let mut cursor = self.head[0];
            while let Some(idx) = cursor {
                ids.push(idx);
                cursor = self.node(idx).forward[0];
            }
            ids
        };
        if base.len() != self.len {
            return Err(format!("len {} but {} level-0 nodes", self.len, base.len()));
        }
        for window in base.windows(2) {
            if self.node(window[0]).key >= self.node(window[1]).key {
                return Err("level 0 not strictly sorted".into());
            }
        }
        for node in self.arena.iter().flatten() {
            if node.forward.is_empty() {
                return Err("tower height 0".into());
            }
        }
        let mut below: std::collections::HashSet<usize> = base.iter().copied().collect();
        for level in 1..self.max_height {
            let mut ids = Vec::new();
            let mut cursor = self.head[level];
            while let Some(idx) = cursor {
                ids.push(idx);
                cursor = self.node(idx).forward[level];
            }
            for window in ids.windows(2) {
                if self.node(window[0]).key >= self.node(window[1]).key {
                    return Err(format!("level {level} not strictly sorted"));
                }
            }
            for &idx in &ids {
                if !below.contains(&idx) {
                    return Err(format!(
                        "level {level} is not a subsequence of level {}",
                        level - 1
                    ));
                }
            }
            below = ids.iter().copied().collect();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Method;

    #[test]
    fn rejects_bad_probability() {
        assert!(SkipList::<u32>::new(1.0, 10).is_err());
        assert!(SkipList::<u32>::new(-0.1, 10).is_err());
        assert!(SkipList::<u32>::new(0.0, 10).is_ok());
    }

    #[test]
    fn zero_promotion_gives_a_sorted_linked_list() {
        let mut src = RandomSource::new(1);
        let mut list = SkipList::new(0.0, 100).unwrap();
        for k in [5u32, 1, 9, 3] {
            list.insert(k, &mut src).unwrap();
        }
        list.validate().unwrap();
        assert!(list.keys_and_heights().iter().all(|&(_, h)| h == 1));
        // Searching the smallest key follows exactly one data link.
        assert_eq!(list.search(&1).links_traversed, 1);
    }

    #[test]
    fn empty_list_search_touches_no_links() {
        let mut list = SkipList::<u32>::new(0.5, 100).unwrap();
        let outcome = list.search(&5);
        assert!(!outcome.found);
        assert_eq!(outcome.links_traversed, 0);
    }

    #[test]
    fn duplicate_and_missing_errors() {
        let mut src = RandomSource::new(2);
        let mut list = SkipList::new(0.5, 100).unwrap();
        list.insert(4u32, &mut src).unwrap();
        assert_eq!(
            list.insert(4, &mut src).unwrap_err(),
            SkipListError::DuplicateKey
        );
        assert_eq!(list.delete(&5).unwrap_err(), SkipListError::MissingKey);
    }

    #[test]
    fn insert_then_delete_restores_structure() {
        let mut src = RandomSource::new(3);
        let mut list = SkipList::new(0.5, 100).unwrap();
        for k in [2u32, 4, 6] {
            list.insert(k, &mut src).unwrap();
        }
        let before = list.level_dump();
        list.insert(3, &mut src).unwrap();
        list.delete(&3).unwrap();
        assert_eq!(list.level_dump(), before);

        let mut single = SkipList::new(0.5, 10).unwrap();
        single.insert(1u32, &mut src).unwrap();
        single.delete(&1).unwrap();
        assert!(single.is_empty());
    }

    #[test]
    fn random_interleavings_preserve_invariants() {
        let mut src = RandomSource::new(4);
        let mut list = SkipList::new(0.5, 2000).unwrap();
        let mut model = std::collections::BTreeSet::new();
        for _ in 0..1000 {
            let key = src.uniform_below(200, Method::Rejection) as u32;
            if model.contains(&key) {
                assert!(list.contains(&key));
                list.delete(&key).unwrap();
                model.remove(&key);
            } else {
                assert!(!list.contains(&key));
                list.insert(key, &mut src).unwrap();
                model.insert(key);
            }
            list.validate().unwrap();
        }
        let keys: Vec<u32> = list.keys_and_heights().iter().map(|(k, _)| **k).collect();
        let expected: Vec<u32> = model.iter().copied().collect();
        assert_eq!(keys, expected);
    }

    #[test]
    fn mean_links_per_element_tracks_promotion_rate() {
        for (seed, p) in [(10u64, 0.1f64), (11, 0.25), (12, 0.5)] {
            let n = 10_000u32;
            let mut src = RandomSource::new(seed);
            let mut list = SkipList::new(p, n as u64).unwrap();
            for k in 0..n {
                list.insert(k, &mut src).unwrap();
            }
            let heights: Vec<f64> = list
                .keys_and_heights()
                .iter()
                .map(|&(_, h)| h as f64)
                .collect();
            let mean = heights.iter().sum::<f64>() / heights.len() as f64;
            let expected = 1.0 / (1.0 - p);
            let var = heights.iter().map(|h| (h - mean).powi(2)).sum::<f64>()
                / (heights.len() - 1) as f64;
            let se = (var / heights.len() as f64).sqrt();
            assert!(
                (mean - expected).abs() <= 3.0 * se,
                "p={p}: mean {mean} vs {expected}"
            );
        }
    }

    #[test]
    fn search_cost_stays_within_step_budget() {
        // At p = 1/2 the expected survivor count shrinks by 3/4 per step, so
        // searches finish within log_{4/3}(n / 0.01) steps with probability
        // 0.99. The link counter is a proxy for steps; allow +5 slack.
        let n = 4096u32;
        let mut src = RandomSource::new(13);
        let mut list = SkipList::new(0.5, n as u64).unwrap();
        let mut keys: Vec<u32> = (0..n).collect();
        src.shuffle(&mut keys);
        for &k in &keys {
            list.insert(k, &mut src).unwrap();
        }
        let mut costs: Vec<u64> = (0..n).map(|k| list.search(&k).links_traversed).collect();
        costs.sort_unstable();
        let pct99 = costs[(0.99 * (n as f64 - 1.0)) as usize];
        let budget = ((n as f64) / 0.01).ln() / (4.0f64 / 3.0).ln();
        assert!(
            (pct99 as f64) <= budget.ceil() + 5.0,
            "99th percentile {pct99} over budget {budget}"
        );
    }

    #[test]
    fn height_tail_decays_geometrically() {
        let p: f64 = 0.5;
        let n = 1024u32;
        let rebuilds = 2000;
        let mut src = RandomSource::new(14);
        let mut exceed5 = 0usize;
        let mut exceed10 = 0usize;
        let base = (n as f64).ln() / (1.0 / p).ln();
        for _ in 0..rebuilds {
            let mut list = SkipList::new(p, n as u64).unwrap();
            for k in 0..n {
                list.insert(k, &mut src).unwrap();
            }
            let max = list.max_tower_height() as f64;
            if max > base + 5.0 {
                exceed5 += 1;
            }
            if max > base + 10.0 {
                exceed10 += 1;
            }
        }
        // Pr[max > log_{1/p} n + c] is about p^c; check at c = 5 and 10.
        let rate5 = exceed5 as f64 / rebuilds as f64;
        let rate10 = exceed10 as f64 / rebuilds as f64;
        assert!(rate5 <= 4.0 * p.powi(5), "c=5 rate {rate5}");
        assert!(
            rate10 <= 4.0 * p.powi(10) + 2.0 / rebuilds as f64,
            "c=10 rate {rate10}"
        );
        assert!(rate10 <= rate5);
    }

    #[test]
    fn split_at_minimum_gives_empty_left() {
        let mut src = RandomSource::new(15);
        let mut list = SkipList::new(0.5, 100).unwrap();
        for k in 1..=20u32 {
            list.insert(k, &mut src).unwrap();
        }
        let dump = list.level_dump();
        let (left, right) = list.split(&0);
        assert!(left.is_empty());
        assert_eq!(right.len(), 20);
        assert_eq!(right.level_dump(), dump);
        right.validate().unwrap();
    }

    #[test]
    fn split_then_merge_reproduces_exact_links() {
        let mut src = RandomSource::new(16);
        let mut list = SkipList::new(0.5, 2000).unwrap();
        let n = 1u32 << 10;
        for k in 0..n {
            list.insert(k, &mut src).unwrap();
        }
        let before = list.level_dump();
        let heights_before: Vec<usize> = list.keys_and_heights().iter().map(|&(_, h)| h).collect();
        let total_links = list.total_links();

        let (left, right) = list.split(&(n / 2));
        left.validate().unwrap();
        right.validate().unwrap();
        let cut_mutations = left.stats().boundary_link_mutations;
        // Only O(max height) links move, not O(total links).
        assert!(cut_mutations <= 2 * 64, "{cut_mutations} mutations");
        assert!(cut_mutations < total_links / 4);

        let merged = SkipList::merge(left, right).unwrap();
        merged.validate().unwrap();
        assert_eq!(merged.level_dump(), before);
        let heights_after: Vec<usize> = merged.keys_and_heights().iter().map(|&(_, h)| h).collect();
        assert_eq!(heights_before, heights_after);
    }

    #[test]
    fn merge_rejects_overlap() {
        let mut src = RandomSource::new(17);
        let mut a = SkipList::new(0.5, 10).unwrap();
        let mut b = SkipList::new(0.5, 10).unwrap();
        a.insert(5u32, &mut src).unwrap();
        b.insert(3u32, &mut src).unwrap();
        assert_eq!(
            SkipList::merge(a, b).unwrap_err(),
            SkipListError::OverlappingRanges
        );
    }
}
