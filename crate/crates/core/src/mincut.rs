//! Randomized minimum cut by edge contraction.
//!
//! A contraction run processes the edge multiset in a uniformly random
//! order through a union-find, which is distributionally identical to
//! repeatedly contracting a uniform random surviving edge, and stops when
//! two super-vertices remain. A single run finds any particular minimum
//! cut with probability at least 2/(n(n-1)); amplification repeats runs
//! and keeps the smallest cut seen.

use crate::rng::RandomSource;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("self-loop {0} -> {0} is not allowed")]
    SelfLoop(u32),
    #[error("vertex {id} out of range for {count} vertices")]
    VertexOutOfRange { id: u32, count: u32 },
    #[error("graph must have at least 2 vertices")]
    TooSmall,
    #[error("graph is disconnected; contraction would stall")]
    Disconnected,
    #[error("repetition count must be at least 1")]
    NoRepetitions,
    #[error("malformed graph text: {0}")]
    Parse(String),
}

/// Undirected multigraph: dense vertex ids, a multiset of edges, no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiGraph {
    vertex_count: u32,
    edges: Vec<(u32, u32)>,
}

impl MultiGraph {
    pub fn new(vertex_count: u32, edges: Vec<(u32, u32)>) -> Result<Self, GraphError> {
        if vertex_count < 2 {
            return Err(GraphError::TooSmall);
        }
        for &(u, v) in &edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            for id in [u, v] {
                if id >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        id,
                        count: vertex_count,
                    });
                }
            }
        }
        Ok(MultiGraph {
            vertex_count,
            edges,
        })
    }

    /// Plain-text format: first line `n m`, then `m` lines `u v` (0-based).
    pub fn from_text(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| GraphError::Parse("empty input".into()))?;
        let mut head = header.split_whitespace();
        let n: u32 = parse_field(head.next(), "vertex count")?;
        let m: usize = parse_field(head.next(), "edge count")?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| GraphError::Parse(format!("expected {m} edge lines")))?;
            let mut fields = line.split_whitespace();
            let u: u32 = parse_field(fields.next(), "edge endpoint")?;
            let v: u32 = parse_field(fields.next(), "edge endpoint")?;
            edges.push((u, v));
        }
        MultiGraph::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.vertex_count, self.edges.len());
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn vertex_count(&self) -> u32 {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.vertex_count as usize);
        let mut components = self.vertex_count;
        for &(u, v) in &self.edges {
            if uf.union(u as usize, v as usize) {
                components -= 1;
            }
        }
        components == 1
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T, GraphError> {
    field
        .ok_or_else(|| GraphError::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|_| GraphError::Parse(format!("bad {what}")))
}

/// A cut: the two super-vertex sides and the number of crossing edges,
/// recomputed against the original graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CutResult {
    pub partition: (Vec<u32>, Vec<u32>),
    pub cut_size: usize,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// One contraction run. Requires a connected graph on >= 2 vertices.
pub fn karger_contract(
    src: &mut RandomSource,
    graph: &MultiGraph,
) -> Result<CutResult, GraphError> {
    if !graph.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let n = graph.vertex_count as usize;
    let mut order: Vec<usize> = (0..graph.edges.len()).collect();
    src.shuffle(&mut order);
    let mut uf = UnionFind::new(n);
    let mut components = n;
    for idx in order {
        if components == 2 {
            break;
        }
        let (u, v) = graph.edges[idx];
        if uf.union(u as usize, v as usize) {
            components -= 1;
        }
    }
    debug_assert_eq!(components, 2);
    let side_root = uf.find(0);
    let mut side_a = Vec::new();
    let mut side_b = Vec::new();
    for v in 0..graph.vertex_count {
        if uf.find(v as usize) == side_root {
            side_a.push(v);
        } else {
            side_b.push(v);
        }
    }
    let cut_size = graph
        .edges
        .iter()
        .filter(|&&(u, v)| (uf.find(u as usize) == side_root) != (uf.find(v as usize) == side_root))
        .count();
    Ok(CutResult {
        partition: (side_a, side_b),
        cut_size,
    })
}

/// Smallest cut over `repetitions` independent contraction runs.
pub fn karger_amplified(
    src: &mut RandomSource,
    graph: &MultiGraph,
    repetitions: u64,
) -> Result<CutResult, GraphError> {
    if repetitions == 0 {
        return Err(GraphError::NoRepetitions);
    }
    let mut best: Option<CutResult> = None;
    for _ in 0..repetitions {
        let cut = karger_contract(src, graph)?;
        if best.as_ref().is_none_or(|b| cut.cut_size < b.cut_size) {
            best = Some(cut);
        }
    }
    Ok(best.expect("at least one repetition"))
}

/// Two complete graphs on `clique_size` vertices joined by a single bridge;
/// its unique minimum cut is the bridge.
pub fn two_cliques_with_bridge(clique_size: u32) -> MultiGraph {
    let n = 2 * clique_size;
    let mut edges = Vec::new();
    for offset in [0, clique_size] {
        for i in 0..clique_size {
            for j in (i + 1)..clique_size {
                edges.push((offset + i, offset + j));
            }
        }
    }
    edges.push((0, clique_size));
    MultiGraph::new(n, edges).expect("bridge graph is valid")
}

/// Cycle on `n` vertices; every minimum cut has size 2.
pub fn cycle(n: u32) -> MultiGraph {
    let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
    MultiGraph::new(n, edges).expect("cycle is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verify_cut(graph: &MultiGraph, cut: &CutResult) {
        let (a, b) = &cut.partition;
        assert!(!a.is_empty() && !b.is_empty());
        assert_eq!(a.len() + b.len(), graph.vertex_count() as usize);
        let in_a: std::collections::HashSet<u32> = a.iter().copied().collect();
        let recomputed = graph
            .edges()
            .iter()
            .filter(|&&(u, v)| in_a.contains(&u) != in_a.contains(&v))
            .count();
        assert_eq!(recomputed, cut.cut_size);
    }

    #[test]
    fn parallel_edges_cut_is_their_count() {
        let graph = MultiGraph::new(2, vec![(0, 1); 5]).unwrap();
        for seed in 0..20 {
            let mut src = RandomSource::new(seed);
            let cut = karger_contract(&mut src, &graph).unwrap();
            assert_eq!(cut.cut_size, 5);
            verify_cut(&graph, &cut);
        }
    }

    #[test]
    fn cycle_cut_is_always_two() {
        let graph = cycle(9);
        for seed in 0..50 {
            let mut src = RandomSource::new(seed);
            let cut = karger_contract(&mut src, &graph).unwrap();
            assert_eq!(cut.cut_size, 2);
            verify_cut(&graph, &cut);
        }
    }

    /// Contraction outcome for one fixed edge order, written independently
    /// of the production path.
    fn contract_by_order(graph: &MultiGraph, order: &[usize]) -> usize {
        let n = graph.vertex_count() as usize;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                x = parent[x];
            }
            x
        }
        let mut components = n;
        for &idx in order {
            if components == 2 {
                break;
            }
            let (u, v) = graph.edges()[idx];
            let (ru, rv) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
            if ru != rv {
                parent[ru] = rv;
                components -= 1;
            }
        }
        let root0 = find(&mut parent, 0);
        graph
            .edges()
            .iter()
            .filter(|&&(u, v)| {
                (find(&mut parent, u as usize) == root0) != (find(&mut parent, v as usize) == root0)
            })
            .count()
    }

    #[test]
    fn complete_graph_enumeration_meets_success_floor() {
        // K4: enumerate all 720 edge orders. Each single-vertex cut (the
        // only size-3 cuts) must be produced by at least 1/6 of the orders,
        // matching the 2/(n(n-1)) floor at n = 4.
        let mut edges = Vec::new();
        for i in 0..4u32 {
            for j in (i + 1)..4 {
                edges.push((i, j));
            }
        }
        let graph = MultiGraph::new(4, edges).unwrap();
        let mut order: Vec<usize> = (0..6).collect();
        let mut size_three = 0usize;
        let mut total = 0usize;
        permute(&mut order, 0, &mut |perm| {
            total += 1;
            if contract_by_order(&graph, perm) == 3 {
                size_three += 1;
            }
        });
        assert_eq!(total, 720);
        let rate = size_three as f64 / total as f64;
        // Four disjoint minimum cuts, each with probability >= 1/6.
        assert!(rate >= 4.0 / 6.0 - 1e-12, "rate {rate}");

        // The production path agrees with the enumeration within
        // Monte-Carlo error.
        let trials = 20_000u64;
        let mut src = RandomSource::new(40);
        let mut hits = 0u64;
        for _ in 0..trials {
            if karger_contract(&mut src, &graph).unwrap().cut_size == 3 {
                hits += 1;
            }
        }
        let observed = hits as f64 / trials as f64;
        let se = (rate * (1.0 - rate) / trials as f64).sqrt();
        assert!((observed - rate).abs() <= 3.0 * se, "{observed} vs {rate}");
    }

    fn permute<F: FnMut(&[usize])>(items: &mut Vec<usize>, k: usize, visit: &mut F) {
        if k == items.len() {
            visit(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, visit);
            items.swap(k, i);
        }
    }

    #[test]
    fn bridge_graph_single_run_success_rate() {
        let graph = two_cliques_with_bridge(4);
        assert_eq!(graph.vertex_count(), 8);
        assert_eq!(graph.edges().len(), 13);
        let trials = 20_000u64;
        let mut src = RandomSource::new(17);
        let mut hits = 0u64;
        for _ in 0..trials {
            let cut = karger_contract(&mut src, &graph).unwrap();
            verify_cut(&graph, &cut);
            if cut.cut_size == 1 {
                hits += 1;
            }
        }
        let rate = hits as f64 / trials as f64;
        assert!(rate >= 1.0 / 28.0, "single-run success rate {rate}");
    }

    #[test]
    fn amplification_brings_failure_below_target() {
        // (1 - 1/28)^129 is about 0.009, so 129 repetitions find the bridge
        // with probability about 0.99; Monte-Carlo over 300 amplified runs.
        let graph = two_cliques_with_bridge(4);
        let reps = (28.0 * 100f64.ln()).ceil() as u64;
        assert_eq!(reps, 129);
        let mut src = RandomSource::new(23);
        let mut failures = 0;
        let runs = 300;
        for _ in 0..runs {
            let cut = karger_amplified(&mut src, &graph, reps).unwrap();
            if cut.cut_size != 1 {
                failures += 1;
            }
        }
        // Expected failures ~3; allow generous slack.
        assert!(
            failures <= 12,
            "{failures} of {runs} amplified runs missed the bridge"
        );
    }

    #[test]
    fn single_repetition_reduces_to_one_run() {
        let graph = cycle(6);
        let mut a = RandomSource::new(5);
        let mut b = RandomSource::new(5);
        let amplified = karger_amplified(&mut a, &graph, 1).unwrap();
        let single = karger_contract(&mut b, &graph).unwrap();
        assert_eq!(amplified, single);
        assert!(karger_amplified(&mut a, &graph, 0).is_err());
    }

    #[test]
    fn invalid_graphs_are_rejected() {
        assert_eq!(
            MultiGraph::new(3, vec![(1, 1)]).unwrap_err(),
            GraphError::SelfLoop(1)
        );
        assert!(matches!(
            MultiGraph::new(3, vec![(0, 7)]).unwrap_err(),
            GraphError::VertexOutOfRange { .. }
        ));
        assert_eq!(
            MultiGraph::new(1, vec![]).unwrap_err(),
            GraphError::TooSmall
        );
        let disconnected = MultiGraph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let mut src = RandomSource::new(1);
        assert_eq!(
            karger_contract(&mut src, &disconnected).unwrap_err(),
            GraphError::Disconnected
        );
    }

    #[test]
    fn text_round_trip() {
        let graph = two_cliques_with_bridge(3);
        let parsed = MultiGraph::from_text(&graph.to_text()).unwrap();
        assert_eq!(graph, parsed);
        assert!(MultiGraph::from_text("").is_err());
        assert!(MultiGraph::from_text("2 1\n").is_err());
        assert!(MultiGraph::from_text("2 1\n0 x\n").is_err());
        assert!(MultiGraph::from_text("2 1\n0 0\n").is_err());
    }
}
