//! Brute-force reference computations for the integration tests. Everything
//! here works from first principles — direct set arithmetic and exhaustive
//! scans — so library results are checked against an independent path.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use commact::graph::FiniteGraph;
use commact::gset::{GSet, Token};
use commact::sageev::InvolutivePreposet;
use commact::words::Word;

/// `#(M △ wM)` by mapping every member through the word and diffing sets.
pub fn brute_ell(gset: &Arc<GSet>, members: &BTreeSet<Token>, word: &Word) -> u64 {
    let image: BTreeSet<Token> = members
        .iter()
        .map(|m| gset.apply_word(word, m).expect("member maps"))
        .collect();
    members.symmetric_difference(&image).count() as u64
}

/// Splitmix-style generator for deterministic test-local sampling.
pub struct TestRng(u64);

impl TestRng {
    #[must_use]
    pub fn new(seed: u64) -> Self {
        TestRng(seed.wrapping_add(0x9e37_79b9_7f4a_7c15))
    }

    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n.max(1)
    }
}

/// All-pairs distances by breadth-first search from every vertex.
pub fn all_distances(graph: &FiniteGraph) -> Vec<Vec<u32>> {
    (0..graph.vertex_count())
        .map(|v| graph.bfs_distances(v))
        .collect()
}

/// The medians of a triple by scanning every vertex for membership in all
/// three pairwise intervals.
pub fn brute_medians(dist: &[Vec<u32>], x: usize, y: usize, z: usize) -> Vec<usize> {
    let on = |a: usize, b: usize, m: usize| dist[a][m] + dist[m][b] == dist[a][b];
    (0..dist.len())
        .filter(|&m| on(x, y, m) && on(y, z, m) && on(x, z, m))
        .collect()
}

/// Checks that `verts` carries a hypercube labelling of dimension `k` and
/// that the labelling is induced: adjacency exactly at Hamming distance one.
fn is_cube(graph: &FiniteGraph, verts: &[u32], k: usize) -> bool {
    let size = 1usize << k;
    debug_assert_eq!(verts.len(), size);
    let inside: BTreeSet<u32> = verts.iter().copied().collect();
    let internal_neighbors = |v: u32| -> Vec<u32> {
        graph
            .neighbors(v as usize)
            .iter()
            .copied()
            .filter(|u| inside.contains(u))
            .collect()
    };
    if verts.iter().any(|&v| internal_neighbors(v).len() != k) {
        return false;
    }
    // Hypercubes are vertex- and axis-transitive, so the first vertex can be
    // label 0 and any ordering of its neighbours the axes.
    let origin = verts[0];
    let axes = internal_neighbors(origin);
    let mut perm: Vec<usize> = (0..k).collect();
    loop {
        if cube_labelling_works(graph, &inside, origin, &perm.iter().map(|&i| axes[i]).collect::<Vec<_>>(), k) {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn cube_labelling_works(
    graph: &FiniteGraph,
    inside: &BTreeSet<u32>,
    origin: u32,
    axes: &[u32],
    k: usize,
) -> bool {
    let size = 1usize << k;
    let mut vertex = vec![u32::MAX; size];
    vertex[0] = origin;
    for (i, &a) in axes.iter().enumerate() {
        vertex[1 << i] = a;
    }
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by_key(|m| m.count_ones());
    for &m in &order {
        if m.count_ones() < 2 {
            continue;
        }
        let i = m.trailing_zeros();
        let a = vertex[m ^ (1 << i)];
        let j = (m ^ (1 << i)).trailing_zeros();
        let b = vertex[m ^ (1 << j)];
        // The label m is the unique common internal neighbour of its two
        // predecessors other than their shared predecessor.
        let shared = vertex[m ^ (1 << i) ^ (1 << j)];
        let mut candidate = u32::MAX;
        for &u in graph.neighbors(a as usize) {
            if u != shared
                && inside.contains(&u)
                && graph.has_edge(u, b)
            {
                if candidate != u32::MAX {
                    return false;
                }
                candidate = u;
            }
        }
        if candidate == u32::MAX {
            return false;
        }
        vertex[m as usize] = candidate;
    }
    let distinct: BTreeSet<u32> = vertex.iter().copied().collect();
    if distinct.len() != size || vertex.iter().any(|&v| v == u32::MAX) {
        return false;
    }
    for a in 0..size {
        for b in a + 1..size {
            let adjacent = graph.has_edge(vertex[a], vertex[b]);
            if adjacent != ((a ^ b).count_ones() == 1) {
                return false;
            }
        }
    }
    true
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Cube counts per dimension by exhaustive subset enumeration: dimension 0
/// and 1 are vertices and edges, higher dimensions try every vertex subset
/// of the right size.
pub fn brute_cube_counts(graph: &FiniteGraph, max_dim: usize) -> Vec<u64> {
    let n = graph.vertex_count();
    let mut counts = vec![n as u64, graph.edge_count() as u64];
    for k in 2..=max_dim {
        let size = 1usize << k;
        if size > n {
            break;
        }
        let mut count = 0u64;
        let mut pick: Vec<u32> = (0..size as u32).collect();
        loop {
            if is_cube(graph, &pick, k) {
                count += 1;
            }
            if !next_combination(&mut pick, n as u32) {
                break;
            }
        }
        counts.push(count);
    }
    while counts.last() == Some(&0) {
        counts.pop();
    }
    counts
}

fn next_combination(pick: &mut [u32], n: u32) -> bool {
    let k = pick.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if pick[i] < n - (k - i) as u32 {
            pick[i] += 1;
            for j in i + 1..k {
                pick[j] = pick[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Every ultraselection mask by scanning all `2^E` subsets against the two
/// defining conditions.
pub fn brute_ultraselections(p: &InvolutivePreposet) -> Vec<u64> {
    let n = p.len();
    assert!(n <= 20, "brute ultraselection scan capped at 20 elements");
    let mut out = Vec::new();
    'masks: for mask in 0u64..1 << n {
        for i in 0..n {
            let inside = mask >> i & 1 == 1;
            if inside == (mask >> p.sigma(i) & 1 == 1) {
                continue 'masks;
            }
            if inside {
                for j in 0..n {
                    if p.le(i, j) && mask >> j & 1 == 0 {
                        continue 'masks;
                    }
                }
            }
        }
        out.push(mask);
    }
    out
}
