use std::collections::BTreeMap;

use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::gset::{GSet, Token};
use crate::words::Letter;

/// Ball of a Schreier graph: the part of an orbit reachable from the seed
/// points within a given number of generator applications.
///
/// Vertices are numbered in breadth-first discovery order; within one level
/// new tokens are sorted, so the numbering does not depend on the generator
/// enumeration order. Edges carry their generator label and include loops;
/// both endpoints always lie in the ball.
#[derive(Debug, Clone, Serialize)]
pub struct SchreierGraph {
    pub vertices: Vec<Token>,
    pub depth: Vec<u32>,
    /// Labeled edges `(x, generator, image)` for every vertex `x` and
    /// generator whose image stays inside the ball.
    pub edges: Vec<(u32, usize, u32)>,
    pub radius: u32,
    pub base: Vec<Token>,
    /// True when the last explored level produced no new vertices, i.e. the
    /// ball is the whole (finite) orbit.
    pub exhausted: bool,
}

impl SchreierGraph {
    /// Explores the orbit of the seed points of `gset` to the given radius.
    pub fn build(gset: &GSet, radius: u32, budget: &Budget) -> Result<Self> {
        let base = {
            let mut seeds = gset.seeds();
            seeds.sort();
            seeds.dedup();
            seeds
        };
        if base.is_empty() {
            return Err(Error::Validation("gset has no seed points".into()));
        }
        let mut index: BTreeMap<Token, u32> = BTreeMap::new();
        let mut vertices: Vec<Token> = Vec::new();
        let mut depth: Vec<u32> = Vec::new();
        for token in &base {
            if !index.contains_key(token) {
                index.insert(token.clone(), vertices.len() as u32);
                vertices.push(token.clone());
                depth.push(0);
            }
        }
        let mut frontier: Vec<u32> = (0..vertices.len() as u32).collect();
        let mut exhausted = false;
        for level in 1..=radius {
            let mut discovered: Vec<Token> = Vec::new();
            for &v in &frontier {
                let token = vertices[v as usize].clone();
                for letter in gset.alphabet.letters() {
                    let image = gset.apply_letter(letter, &token)?;
                    if !index.contains_key(&image) && !discovered.contains(&image) {
                        discovered.push(image);
                    }
                }
            }
            if discovered.is_empty() {
                exhausted = true;
                break;
            }
            discovered.sort();
            frontier = Vec::with_capacity(discovered.len());
            for token in discovered {
                let id = vertices.len() as u32;
                if vertices.len() >= budget.bfs_vertices {
                    return Err(Error::Budget(format!(
                        "orbit ball exceeds {} vertices at radius {level}",
                        budget.bfs_vertices
                    )));
                }
                index.insert(token.clone(), id);
                vertices.push(token);
                depth.push(level);
                frontier.push(id);
            }
        }
        if !exhausted && radius > 0 {
            // One cheap probe: the ball is the whole orbit when the last
            // level's images all stay inside it.
            exhausted = frontier.iter().try_fold(true, |acc, &v| -> Result<bool> {
                if !acc {
                    return Ok(false);
                }
                for letter in gset.alphabet.letters() {
                    if !index.contains_key(&gset.apply_letter(letter, &vertices[v as usize])?) {
                        return Ok(false);
                    }
                }
                Ok(true)
            })?;
        }
        let mut edges = Vec::new();
        for (v, token) in vertices.iter().enumerate() {
            for gen in 0..gset.alphabet.len() {
                let image = gset.apply_letter(Letter { gen, inv: false }, token)?;
                if let Some(&w) = index.get(&image) {
                    edges.push((v as u32, gen, w));
                }
            }
        }
        Ok(SchreierGraph {
            vertices,
            depth,
            edges,
            radius,
            base,
            exhausted,
        })
    }

    #[must_use]
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Distinct unlabeled edges with loops dropped, as sorted vertex pairs.
    #[must_use]
    pub fn simple_edges(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = self
            .edges
            .iter()
            .filter(|(u, _, v)| u != v)
            .map(|&(u, _, v)| if u <= v { (u, v) } else { (v, u) })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Number of components of the induced subgraph on the annulus
    /// `inner < depth <= outer` that contain a vertex at depth exactly
    /// `outer`.
    #[must_use]
    pub fn outward_components(&self, inner: u32, outer: u32) -> usize {
        let n = self.vertices.len();
        let in_annulus =
            |v: u32| -> bool { self.depth[v as usize] > inner && self.depth[v as usize] <= outer };
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], mut v: u32) -> u32 {
            while parent[v as usize] != v {
                parent[v as usize] = parent[parent[v as usize] as usize];
                v = parent[v as usize];
            }
            v
        }
        for &(u, _, v) in &self.edges {
            if u != v && in_annulus(u) && in_annulus(v) {
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                if ru != rv {
                    parent[ru.max(rv) as usize] = ru.min(rv);
                }
            }
        }
        let mut outward_roots: Vec<u32> = (0..n as u32)
            .filter(|&v| self.depth[v as usize] == outer)
            .map(|v| find(&mut parent, v))
            .collect();
        outward_roots.sort_unstable();
        outward_roots.dedup();
        outward_roots.len()
    }
}

/// Outcome of the finite end-counting protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndsEstimate {
    pub inner_radius: u32,
    pub outer_radius: u32,
    /// Radius of the second, deeper probe used for the stabilization check.
    pub probe_radius: u32,
    pub count: usize,
    pub stabilized: bool,
    /// The orbit was explored completely within the probe radius.
    pub finite_orbit: bool,
}

/// Estimates the number of ends of the Schreier graph of `gset`.
///
/// Counts the components of the annulus between radii `r` and `R` that touch
/// the outer sphere, then repeats with the outer radius pushed to
/// `R + ceil((R - r) / 2)`; `stabilized` records whether the two counts
/// agree. A fully explored finite orbit yields count 0.
pub fn count_ends(gset: &GSet, r: u32, big_r: u32, budget: &Budget) -> Result<EndsEstimate> {
    if r >= big_r {
        return Err(Error::Validation(format!(
            "need inner radius < outer radius, got ({r}, {big_r})"
        )));
    }
    let probe = big_r + (big_r - r).div_ceil(2);
    let graph = SchreierGraph::build(gset, probe, budget)?;
    if graph.exhausted {
        return Ok(EndsEstimate {
            inner_radius: r,
            outer_radius: big_r,
            probe_radius: probe,
            count: 0,
            stabilized: true,
            finite_orbit: true,
        });
    }
    let count = graph.outward_components(r, big_r);
    let recount = graph.outward_components(r, probe);
    Ok(EndsEstimate {
        inner_radius: r,
        outer_radius: big_r,
        probe_radius: probe,
        count,
        stabilized: count == recount,
        finite_orbit: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::gset_fixture;

    #[test]
    fn line_ball_is_interval() {
        let z = gset_fixture("z").unwrap();
        let g = SchreierGraph::build(&z, 3, &Budget::default()).unwrap();
        assert_eq!(g.vertex_count(), 7);
        assert_eq!(g.simple_edges().len(), 6);
        assert!(!g.exhausted);
    }

    #[test]
    fn free_group_ball_count() {
        let f2 = gset_fixture("f2").unwrap();
        let g = SchreierGraph::build(&f2, 2, &Budget::default()).unwrap();
        assert_eq!(g.vertex_count(), 17);
    }

    #[test]
    fn reflection_coset_ball_is_path() {
        let x = gset_fixture("dihedral_inf:ab").unwrap();
        let g = SchreierGraph::build(&x, 4, &Budget::default()).unwrap();
        assert_eq!(g.vertex_count(), 5);
        let simple = g.simple_edges();
        assert_eq!(simple.len(), 4);
        let mut degree = vec![0usize; 5];
        for (u, v) in simple {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        degree.sort_unstable();
        assert_eq!(degree, vec![1, 1, 2, 2, 2]);
    }

    #[test]
    fn line_has_two_ends() {
        let z = gset_fixture("z").unwrap();
        let e = count_ends(&z, 5, 20, &Budget::default()).unwrap();
        assert_eq!(e.count, 2);
        assert!(e.stabilized);
        assert!(!e.finite_orbit);
    }

    #[test]
    fn plane_has_one_end() {
        let z2 = gset_fixture("z2").unwrap();
        let e = count_ends(&z2, 4, 12, &Budget::default()).unwrap();
        assert_eq!(e.count, 1);
        assert!(e.stabilized);
    }

    #[test]
    fn coset_lines_disagree_on_ends() {
        let one = gset_fixture("dihedral_inf").unwrap();
        let two = gset_fixture("z_cross_c2").unwrap();
        let e1 = count_ends(&one, 6, 24, &Budget::default()).unwrap();
        let e2 = count_ends(&two, 6, 24, &Budget::default()).unwrap();
        assert_eq!((e1.count, e1.stabilized), (1, true));
        assert_eq!((e2.count, e2.stabilized), (2, true));
    }

    #[test]
    fn finite_orbit_has_no_ends() {
        let zn = gset_fixture("zn:10").unwrap();
        let e = count_ends(&zn, 2, 8, &Budget::default()).unwrap();
        assert_eq!(e.count, 0);
        assert!(e.finite_orbit);
        assert!(e.stabilized);
    }
}
