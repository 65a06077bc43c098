use std::collections::VecDeque;
use std::sync::OnceLock;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::fixtures::FixtureInfo;

/// Distance value for unreachable pairs.
pub const UNREACHABLE: u32 = u32::MAX;

/// Simple undirected graph on vertices `0..n`, immutable after construction.
///
/// Edges are stored sorted and deduplicated; loops are rejected. All-pairs
/// distances are computed on first use and cached.
#[derive(Debug)]
pub struct FiniteGraph {
    n: usize,
    edges: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
    labels: Option<Vec<String>>,
    dist: OnceLock<Vec<Vec<u32>>>,
}

/// Serialization form of a [`FiniteGraph`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl Clone for FiniteGraph {
    fn clone(&self) -> Self {
        FiniteGraph::new(self.n, self.edges.clone(), self.labels.clone())
            .expect("clone of a valid graph")
    }
}

impl FiniteGraph {
    pub fn new(n: usize, mut edges: Vec<(u32, u32)>, labels: Option<Vec<String>>) -> Result<Self> {
        for e in &mut edges {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
            if e.0 == e.1 {
                return Err(Error::Validation(format!("loop at vertex {}", e.0)));
            }
            if e.1 as usize >= n {
                return Err(Error::Validation(format!(
                    "edge ({}, {}) out of range for {n} vertices",
                    e.0, e.1
                )));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::Validation("one label per vertex required".into()));
            }
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        Ok(FiniteGraph {
            n,
            edges,
            adj,
            labels,
            dist: OnceLock::new(),
        })
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        FiniteGraph::new(json.n, json.edges.clone(), json.labels.clone())
    }

    #[must_use]
    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            edges: self.edges.clone(),
            labels: self.labels.clone(),
        }
    }

    #[must_use]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[must_use]
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    #[must_use]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    #[must_use]
    pub fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(labels) => labels[v].clone(),
            None => v.to_string(),
        }
    }

    #[must_use]
    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        self.edges.binary_search(&(a, b)).is_ok()
    }

    /// Breadth-first distances from one vertex.
    #[must_use]
    pub fn bfs_distances(&self, src: usize) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.n];
        dist[src] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if dist[v as usize] == UNREACHABLE {
                    dist[v as usize] = dist[u] + 1;
                    queue.push_back(v as usize);
                }
            }
        }
        dist
    }

    /// All-pairs distances, cached. Guarded by `budget.graph_vertices`.
    pub fn distances(&self, budget: &Budget) -> Result<&Vec<Vec<u32>>> {
        if self.n > budget.graph_vertices {
            return Err(Error::Budget(format!(
                "graph has {} vertices, distance cache capped at {}",
                self.n, budget.graph_vertices
            )));
        }
        Ok(self
            .dist
            .get_or_init(|| (0..self.n).map(|v| self.bfs_distances(v)).collect()))
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    #[must_use]
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            seen[start] = true;
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &v in &self.adj[u] {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        stack.push(v as usize);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    #[must_use]
    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }
}

// ---------------------------------------------------------------------------
// Fixed-width bit sets over vertices.

/// Bit set over `0..n`, used for intervals and halfspaces.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexSet {
    blocks: Vec<u64>,
    n: usize,
}

impl VertexSet {
    #[must_use]
    pub fn empty(n: usize) -> Self {
        VertexSet {
            blocks: vec![0; n.div_ceil(64)],
            n,
        }
    }

    pub fn insert(&mut self, v: usize) {
        self.blocks[v / 64] |= 1 << (v % 64);
    }

    #[must_use]
    pub fn contains(&self, v: usize) -> bool {
        self.blocks[v / 64] >> (v % 64) & 1 == 1
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    #[must_use]
    pub fn capacity(&self) -> usize {
        self.n
    }

    /// Number of elements in the triple intersection.
    #[must_use]
    pub fn intersect3_len(&self, b: &VertexSet, c: &VertexSet) -> usize {
        self.blocks
            .iter()
            .zip(&b.blocks)
            .zip(&c.blocks)
            .map(|((x, y), z)| (x & y & z).count_ones() as usize)
            .sum()
    }

    /// The unique element of the triple intersection, if it is a singleton.
    #[must_use]
    pub fn intersect3_single(&self, b: &VertexSet, c: &VertexSet) -> Option<usize> {
        let mut found = None;
        for (i, ((x, y), z)) in self.blocks.iter().zip(&b.blocks).zip(&c.blocks).enumerate() {
            let w = x & y & z;
            if w != 0 {
                if found.is_some() || w.count_ones() != 1 {
                    return None;
                }
                found = Some(i * 64 + w.trailing_zeros() as usize);
            }
        }
        found
    }

    #[must_use]
    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .all(|(x, y)| x & !y == 0)
    }

    #[must_use]
    pub fn symdiff_len(&self, other: &VertexSet) -> usize {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(x, y)| (x ^ y).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.contains(v))
    }

    #[must_use]
    pub fn raw_blocks(&self) -> &[u64] {
        &self.blocks
    }

    #[must_use]
    pub fn to_sorted_vec(&self) -> Vec<u32> {
        self.iter().map(|v| v as u32).collect()
    }
}

// ---------------------------------------------------------------------------
// Graph fixtures.

#[must_use]
pub fn list_graph_fixtures() -> Vec<FixtureInfo> {
    let entry = |name: &str, description: &str| FixtureInfo {
        name: name.into(),
        kind: "graph",
        backends: "explicit",
        generators: Vec::new(),
        description: description.into(),
    };
    vec![
        entry("q:d", "hypercube graph of dimension d"),
        entry(
            "box:B,k",
            "lattice box {-B..B}^k with single-step adjacency",
        ),
        entry("path:n", "path on n vertices"),
        entry("cycle:n", "cycle on n vertices"),
        entry("star:k", "star with k leaves"),
        entry("grid:w,h", "w-by-h grid"),
        entry("tree:seed,n", "seeded random tree on n vertices"),
        entry("complete:n", "complete graph on n vertices"),
    ]
}

/// Instantiates a built-in graph fixture, e.g. `q:3`, `box:2,2`, `tree:7,20`.
pub fn graph_fixture(spec: &str) -> Result<FiniteGraph> {
    let (name, params) = match spec.split_once(':') {
        Some((a, b)) => (a, b),
        None => (spec, ""),
    };
    let nums: Vec<i64> = if params.is_empty() {
        Vec::new()
    } else {
        params
            .split(',')
            .map(|p| {
                p.parse()
                    .map_err(|_| Error::Parse(format!("bad graph fixture parameter {p:?}")))
            })
            .collect::<Result<_>>()?
    };
    match (name, nums.as_slice()) {
        ("q", [d]) if (0..=16).contains(d) => Ok(hypercube_graph(*d as usize)),
        ("box", [b, k]) if *b >= 0 && (1..=6).contains(k) => {
            lattice_box_graph(&vec![*b; *k as usize])
        }
        ("path", [n]) if *n >= 1 => FiniteGraph::new(
            *n as usize,
            (1..*n as u32).map(|i| (i - 1, i)).collect(),
            None,
        ),
        ("cycle", [n]) if *n >= 3 => {
            let n = *n as u32;
            let mut edges: Vec<(u32, u32)> = (1..n).map(|i| (i - 1, i)).collect();
            edges.push((0, n - 1));
            FiniteGraph::new(n as usize, edges, None)
        }
        ("star", [k]) if *k >= 1 => FiniteGraph::new(
            *k as usize + 1,
            (1..=*k as u32).map(|i| (0, i)).collect(),
            None,
        ),
        ("grid", [w, h]) if *w >= 1 && *h >= 1 => {
            let (w, h) = (*w as usize, *h as usize);
            let mut edges = Vec::new();
            let id = |x: usize, y: usize| (y * w + x) as u32;
            for y in 0..h {
                for x in 0..w {
                    if x + 1 < w {
                        edges.push((id(x, y), id(x + 1, y)));
                    }
                    if y + 1 < h {
                        edges.push((id(x, y), id(x, y + 1)));
                    }
                }
            }
            FiniteGraph::new(w * h, edges, None)
        }
        ("tree", [seed, n]) if *n >= 1 => Ok(random_tree(*seed as u64, *n as usize)),
        ("complete", [n]) if *n >= 1 => {
            let n = *n as u32;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    edges.push((u, v));
                }
            }
            FiniteGraph::new(n as usize, edges, None)
        }
        _ => Err(Error::Parse(format!("unknown graph fixture {spec:?}"))),
    }
}

/// The hypercube graph: vertices are subsets of a `d`-element set encoded as
/// bit masks, adjacent when the masks differ in exactly one bit. Labels are
/// the bit strings, lowest coordinate first.
#[must_use]
pub fn hypercube_graph(d: usize) -> FiniteGraph {
    let n = 1usize << d;
    let mut edges = Vec::with_capacity(d * n / 2);
    for v in 0..n {
        for i in 0..d {
            let w = v ^ (1 << i);
            if v < w {
                edges.push((v as u32, w as u32));
            }
        }
    }
    let labels = (0..n)
        .map(|v| {
            (0..d)
                .map(|i| if v >> i & 1 == 1 { '1' } else { '0' })
                .collect()
        })
        .collect();
    FiniteGraph::new(n, edges, Some(labels)).expect("hypercube edges are valid")
}

/// Lattice box: vertices are integer tuples with `|x_i| <= bounds[i]`,
/// adjacent when they differ by one in a single coordinate.
pub fn lattice_box_graph(bounds: &[i64]) -> Result<FiniteGraph> {
    if bounds.is_empty() {
        return Err(Error::Validation("box needs at least one coordinate".into()));
    }
    if bounds.iter().any(|&b| b < 0) {
        return Err(Error::Validation("box bounds must be nonnegative".into()));
    }
    let widths: Vec<usize> = bounds.iter().map(|&b| 2 * b as usize + 1).collect();
    let n: usize = widths.iter().product();
    if n > 1 << 20 {
        return Err(Error::Validation(format!("box with {n} vertices is too large")));
    }
    let decode = |mut v: usize| -> Vec<i64> {
        let mut coords = Vec::with_capacity(bounds.len());
        for (i, w) in widths.iter().enumerate() {
            coords.push((v % w) as i64 - bounds[i]);
            v /= w;
        }
        coords
    };
    let mut edges = Vec::new();
    for v in 0..n {
        let coords = decode(v);
        let mut stride = 1usize;
        for (i, w) in widths.iter().enumerate() {
            if coords[i] < bounds[i] {
                edges.push((v as u32, (v + stride) as u32));
            }
            stride *= w;
        }
    }
    let labels = (0..n)
        .map(|v| {
            decode(v)
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    FiniteGraph::new(n, edges, Some(labels))
}

/// Seeded uniform random labelled tree (each new vertex attaches to a
/// uniformly chosen earlier vertex).
#[must_use]
pub fn random_tree(seed: u64, n: usize) -> FiniteGraph {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for v in 1..n {
        let parent = rng.random_range(0..v);
        edges.push((parent as u32, v as u32));
    }
    FiniteGraph::new(n, edges, None).expect("tree edges are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercube_counts() {
        let q3 = hypercube_graph(3);
        assert_eq!(q3.vertex_count(), 8);
        assert_eq!(q3.edge_count(), 12);
        let d = q3.distances(&Budget::default()).unwrap();
        assert_eq!(d[0][7], 3);
    }

    #[test]
    fn box_fixture_grid() {
        let b = lattice_box_graph(&[1, 1]).unwrap();
        assert_eq!(b.vertex_count(), 9);
        assert_eq!(b.edge_count(), 12);
        assert_eq!(b.label(0), "-1,-1");
    }

    #[test]
    fn components_and_fixture_parse() {
        let g = FiniteGraph::new(4, vec![(0, 1), (2, 3)], None).unwrap();
        assert_eq!(g.components().len(), 2);
        assert!(graph_fixture("path:5").unwrap().is_connected());
        assert!(graph_fixture("nonsense:1").is_err());
    }

    #[test]
    fn loops_rejected() {
        assert!(FiniteGraph::new(2, vec![(1, 1)], None).is_err());
    }

    #[test]
    fn random_tree_is_tree() {
        let t = random_tree(11, 40);
        assert_eq!(t.edge_count(), 39);
        assert!(t.is_connected());
    }
}
