use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, VertexSet, UNREACHABLE};
use crate::gset::Permutation;

/// Result of the median-property check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MedianVerdict {
    pub median: bool,
    /// First triple (in lexicographic vertex order) whose interval
    /// intersection is not a single vertex.
    pub counterexample: Option<(u32, u32, u32)>,
}

/// Flat table of interval bit sets `I(x,y) = {t : d(x,t)+d(t,y) = d(x,y)}`.
struct IntervalTable {
    blocks: Vec<u64>,
    stride: usize,
    n: usize,
}

impl IntervalTable {
    fn build(dist: &[Vec<u32>]) -> IntervalTable {
        let n = dist.len();
        let stride = n.div_ceil(64);
        let mut blocks = vec![0u64; n * n * stride];
        for x in 0..n {
            for y in x..n {
                let dxy = dist[x][y];
                if dxy == UNREACHABLE {
                    continue;
                }
                let base = (x * n + y) * stride;
                let mirror = (y * n + x) * stride;
                for t in 0..n {
                    if dist[x][t] != UNREACHABLE
                        && dist[x][t] + dist[t][y] == dxy
                    {
                        blocks[base + t / 64] |= 1 << (t % 64);
                    }
                }
                let (lo, hi) = (base.min(mirror), base.max(mirror));
                if lo != hi {
                    let (a, b) = blocks.split_at_mut(hi);
                    b[..stride].copy_from_slice(&a[lo..lo + stride]);
                }
            }
        }
        IntervalTable { blocks, stride, n }
    }

    fn row(&self, x: usize, y: usize) -> &[u64] {
        let base = (x * self.n + y) * self.stride;
        &self.blocks[base..base + self.stride]
    }

    /// The unique element of `I(x,y) ∩ I(y,z) ∩ I(z,x)`, if a singleton.
    fn triple_point(&self, x: usize, y: usize, z: usize) -> Option<usize> {
        let (a, b, c) = (self.row(x, y), self.row(y, z), self.row(z, x));
        let mut found = None;
        for i in 0..self.stride {
            let w = a[i] & b[i] & c[i];
            if w != 0 {
                if found.is_some() || w.count_ones() != 1 {
                    return None;
                }
                found = Some(i * 64 + w.trailing_zeros() as usize);
            }
        }
        found
    }

    fn is_subset_of(&self, x: usize, y: usize, set: &VertexSet) -> bool {
        let row = self.row(x, y);
        set.blocks_check(row)
    }
}

impl VertexSet {
    fn blocks_check(&self, row: &[u64]) -> bool {
        self.raw_blocks()
            .iter()
            .zip(row)
            .all(|(mine, theirs)| theirs & !mine == 0)
    }
}

/// Checks the median property: every triple of vertices in a common
/// component has a unique "between" vertex. Components are checked
/// separately; cross-component triples are vacuous.
pub fn is_median(graph: &FiniteGraph, budget: &Budget) -> Result<MedianVerdict> {
    let n = graph.vertex_count();
    if n > budget.median_check_vertices {
        return Err(Error::Budget(format!(
            "median check capped at {} vertices, graph has {n}",
            budget.median_check_vertices
        )));
    }
    let dist = graph.distances(budget)?;
    let intervals = IntervalTable::build(dist);
    for (x, row) in dist.iter().enumerate() {
        for y in x + 1..n {
            if row[y] == UNREACHABLE {
                continue;
            }
            for (z, &dxz) in row.iter().enumerate().skip(y + 1) {
                if dxz == UNREACHABLE {
                    continue;
                }
                if intervals.triple_point(x, y, z).is_none() {
                    return Ok(MedianVerdict {
                        median: false,
                        counterexample: Some((x as u32, y as u32, z as u32)),
                    });
                }
            }
        }
    }
    Ok(MedianVerdict {
        median: true,
        counterexample: None,
    })
}

/// A halfspace `P_{x,y}` of an edge: the vertices of the edge's component
/// strictly closer to `x` than to `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Halfspace {
    pub edge: (u32, u32),
    pub side: VertexSet,
}

/// One parallelism class of oriented edges, together with its halfspace.
#[derive(Debug, Clone)]
pub struct OrientedClass {
    pub representative: (u32, u32),
    pub halfspace: VertexSet,
    pub size: usize,
}

/// The partition of oriented edges into parallelism classes.
#[derive(Debug, Clone)]
pub struct WallClasses {
    pub classes: Vec<OrientedClass>,
    /// Class id of the opposite orientation.
    pub opposite: Vec<usize>,
    class_of: BTreeMap<(u32, u32), usize>,
    pub wall_count: usize,
}

impl WallClasses {
    #[must_use]
    pub fn class_of(&self, oriented_edge: (u32, u32)) -> Option<usize> {
        self.class_of.get(&oriented_edge).copied()
    }

    #[must_use]
    pub fn oriented_count(&self) -> usize {
        self.classes.len()
    }
}

/// Witness that some group element carries a halfspace to its complement.
#[derive(Debug, Clone, Serialize)]
pub struct WallInversionWitness {
    pub class: usize,
    pub representative: (u32, u32),
    /// Letters `(generator, inverted)` whose composition, applied right to
    /// left, maps the class to its opposite.
    pub word: Vec<(usize, bool)>,
}

/// Result of the orientation search: an invariant choice of one side per
/// wall, or a wall inversion.
#[derive(Debug, Clone, Serialize)]
pub enum OrientationOutcome {
    Oriented { chosen: Vec<usize> },
    Inversion(WallInversionWitness),
}

/// Cube complex of a median graph: for each dimension, the list of cubes as
/// sorted vertex sets with the wall classes they cross.
#[derive(Debug, Clone, Serialize)]
pub struct Cube {
    pub vertices: Vec<u32>,
    /// Unoriented wall ids, one per coordinate direction.
    pub walls: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeComplex {
    pub cubes: Vec<Vec<Cube>>,
}

impl CubeComplex {
    #[must_use]
    pub fn counts(&self) -> Vec<usize> {
        self.cubes.iter().map(Vec::len).collect()
    }
}

/// Minimal invariant cube and, when an orientation exists, the fixed corner.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantCubeReport {
    pub cube: Vec<u32>,
    pub dimension: usize,
    pub fixed_vertex: Option<u32>,
    pub group_order: usize,
}

/// The finite embedding `x ↦ H_x △ H_{x₀}` into sets of oriented classes.
#[derive(Debug, Clone, Serialize)]
pub struct PowersetEmbedding {
    pub basepoint: u32,
    pub images: Vec<BTreeSet<usize>>,
    pub doubled_isometry: bool,
}

/// A verified median graph with its distance and interval tables.
pub struct MedianGraph {
    graph: FiniteGraph,
    dist: Vec<Vec<u32>>,
    intervals: IntervalTable,
    comp_id: Vec<usize>,
    comp_size: Vec<usize>,
}

impl MedianGraph {
    /// Verifies the median property and caches the geometry tables.
    pub fn new(graph: FiniteGraph, budget: &Budget) -> Result<Self> {
        let verdict = is_median(&graph, budget)?;
        if let Some((x, y, z)) = verdict.counterexample {
            return Err(Error::Domain(format!(
                "graph is not median: triple ({x}, {y}, {z}) has no unique middle"
            )));
        }
        let dist = graph.distances(budget)?.clone();
        let intervals = IntervalTable::build(&dist);
        let components = graph.components();
        let mut comp_id = vec![0usize; graph.vertex_count()];
        let mut comp_size = vec![0usize; components.len()];
        for (c, comp) in components.iter().enumerate() {
            comp_size[c] = comp.len();
            for &v in comp {
                comp_id[v] = c;
            }
        }
        Ok(MedianGraph {
            graph,
            dist,
            intervals,
            comp_id,
            comp_size,
        })
    }

    #[must_use]
    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    #[must_use]
    pub fn distance(&self, x: u32, y: u32) -> u32 {
        self.dist[x as usize][y as usize]
    }

    fn check_vertex(&self, v: u32) -> Result<()> {
        if (v as usize) < self.graph.vertex_count() {
            Ok(())
        } else {
            Err(Error::Validation(format!("vertex {v} out of range")))
        }
    }

    /// The unique vertex between each pair of `x, y, z`.
    pub fn median(&self, x: u32, y: u32, z: u32) -> Result<u32> {
        for v in [x, y, z] {
            self.check_vertex(v)?;
        }
        if self.comp_id[x as usize] != self.comp_id[y as usize]
            || self.comp_id[y as usize] != self.comp_id[z as usize]
        {
            return Err(Error::Validation(
                "median needs three vertices of one component".into(),
            ));
        }
        self.intervals
            .triple_point(x as usize, y as usize, z as usize)
            .map(|v| v as u32)
            .ok_or_else(|| Error::Domain("no unique middle vertex".into()))
    }

    /// The halfspace `P_{x,y}` of an oriented edge, with its biconvexity
    /// and partition properties verified.
    pub fn halfspace(&self, x: u32, y: u32) -> Result<Halfspace> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        if !self.graph.has_edge(x, y) {
            return Err(Error::Validation(format!("({x}, {y}) is not an edge")));
        }
        let side = self.halfspace_side(x, y);
        let other = self.halfspace_side(y, x);
        let comp = self.comp_size[self.comp_id[x as usize]];
        if side.len() + other.len() != comp {
            return Err(Error::Assertion(format!(
                "halfspaces of ({x}, {y}) do not partition the component"
            )));
        }
        for set in [&side, &other] {
            if !self.is_convex(set) {
                return Err(Error::Assertion(format!(
                    "halfspace of ({x}, {y}) is not convex"
                )));
            }
        }
        Ok(Halfspace { edge: (x, y), side })
    }

    fn halfspace_side(&self, x: u32, y: u32) -> VertexSet {
        let n = self.graph.vertex_count();
        let mut side = VertexSet::empty(n);
        let dx = &self.dist[x as usize];
        let dy = &self.dist[y as usize];
        for v in 0..n {
            if dx[v] != UNREACHABLE && dx[v] < dy[v] {
                side.insert(v);
            }
        }
        side
    }

    fn is_convex(&self, set: &VertexSet) -> bool {
        let members: Vec<usize> = set.iter().collect();
        for (k, &u) in members.iter().enumerate() {
            for &v in &members[k + 1..] {
                if !self.intervals.is_subset_of(u, v, set) {
                    return false;
                }
            }
        }
        true
    }

    /// All halfspaces containing `x` but not `y`; exactly `d(x,y)` of them.
    pub fn separating_halfspaces(&self, x: u32, y: u32) -> Result<Vec<Halfspace>> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        if self.comp_id[x as usize] != self.comp_id[y as usize] {
            return Err(Error::Validation(
                "separation needs two vertices of one component".into(),
            ));
        }
        let walls = self.wall_classes()?;
        let mut out = Vec::new();
        for class in &walls.classes {
            if class.halfspace.contains(x as usize) && !class.halfspace.contains(y as usize) {
                out.push(Halfspace {
                    edge: class.representative,
                    side: class.halfspace.clone(),
                });
            }
        }
        let d = self.distance(x, y) as usize;
        if out.len() != d {
            return Err(Error::Assertion(format!(
                "{} separating halfspaces for vertices at distance {d}",
                out.len()
            )));
        }
        // Cross-check along one geodesic: each step's halfspace separates.
        let mut cur = y;
        while cur != x {
            let next = self
                .graph
                .neighbors(cur as usize)
                .iter()
                .copied()
                .find(|&w| self.dist[w as usize][x as usize] + 1 == self.dist[cur as usize][x as usize])
                .expect("geodesic step exists");
            let side = self.halfspace_side(next, cur);
            if !(side.contains(x as usize) && !side.contains(y as usize)) {
                return Err(Error::Assertion(
                    "geodesic step halfspace fails to separate its endpoints".into(),
                ));
            }
            cur = next;
        }
        Ok(out)
    }

    /// Partitions oriented edges by halfspace equality and verifies the
    /// partition is generated by elementary parallelism (opposite sides of
    /// squares, same direction).
    pub fn wall_classes(&self) -> Result<WallClasses> {
        let mut oriented: Vec<(u32, u32)> = Vec::with_capacity(2 * self.graph.edge_count());
        for &(a, b) in self.graph.edges() {
            oriented.push((a, b));
            oriented.push((b, a));
        }
        let mut by_halfspace: BTreeMap<VertexSet, usize> = BTreeMap::new();
        let mut classes: Vec<OrientedClass> = Vec::new();
        let mut class_of: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        let mut edge_class: Vec<usize> = Vec::with_capacity(oriented.len());
        for &(a, b) in &oriented {
            let side = self.halfspace_side(a, b);
            let id = *by_halfspace.entry(side.clone()).or_insert_with(|| {
                classes.push(OrientedClass {
                    representative: (a, b),
                    halfspace: side,
                    size: 0,
                });
                classes.len() - 1
            });
            classes[id].size += 1;
            class_of.insert((a, b), id);
            edge_class.push(id);
        }

        // Elementary parallelism closure via union-find over oriented edges.
        let m = oriented.len();
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        let index_of: BTreeMap<(u32, u32), usize> = oriented
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, i))
            .collect();
        for &(a, b) in self.graph.edges() {
            for &c in self.graph.neighbors(a as usize) {
                if c == b {
                    continue;
                }
                for &d in self.graph.neighbors(b as usize) {
                    if d == a || d == c || !self.graph.has_edge(c, d) {
                        continue;
                    }
                    // Square a-b, c-d with rungs {a,c}, {b,d}.
                    for (e1, e2) in [((a, b), (c, d)), ((b, a), (d, c))] {
                        let (i, j) = (index_of[&e1], index_of[&e2]);
                        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                        if ri != rj {
                            parent[ri.max(rj)] = ri.min(rj);
                        }
                    }
                }
            }
        }
        for i in 0..m {
            let r = find(&mut parent, i);
            if edge_class[r] != edge_class[i] {
                return Err(Error::Assertion(
                    "square-generated parallelism differs from halfspace equality".into(),
                ));
            }
        }
        let mut roots_per_class: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for (i, &class) in edge_class.iter().enumerate() {
            let r = find(&mut parent, i);
            roots_per_class.entry(class).or_default().insert(r);
        }
        if roots_per_class.values().any(|roots| roots.len() != 1) {
            return Err(Error::Assertion(
                "halfspace class splits into several square-parallelism classes".into(),
            ));
        }

        let opposite: Vec<usize> = classes
            .iter()
            .map(|c| class_of[&(c.representative.1, c.representative.0)])
            .collect();
        let wall_count = classes.len() / 2;
        Ok(WallClasses {
            classes,
            opposite,
            class_of,
            wall_count,
        })
    }

    fn validate_automorphisms(&self, generators: &[Permutation]) -> Result<()> {
        let n = self.graph.vertex_count();
        for (k, perm) in generators.iter().enumerate() {
            if perm.len() != n {
                return Err(Error::Validation(format!(
                    "generator {k} permutes {} points, graph has {n} vertices",
                    perm.len()
                )));
            }
            for &(a, b) in self.graph.edges() {
                let (pa, pb) = (
                    perm.apply(a as usize, false) as u32,
                    perm.apply(b as usize, false) as u32,
                );
                if !self.graph.has_edge(pa, pb) {
                    return Err(Error::Validation(format!(
                        "generator {k} maps edge ({a}, {b}) to a non-edge ({pa}, {pb})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Action of each generator on oriented class ids.
    fn class_action(
        &self,
        walls: &WallClasses,
        generators: &[Permutation],
    ) -> Result<Vec<Vec<usize>>> {
        self.validate_automorphisms(generators)?;
        let mut actions = Vec::with_capacity(generators.len());
        for perm in generators {
            let mut image = vec![0usize; walls.classes.len()];
            for (id, class) in walls.classes.iter().enumerate() {
                let (a, b) = class.representative;
                let moved = (
                    perm.apply(a as usize, false) as u32,
                    perm.apply(b as usize, false) as u32,
                );
                image[id] = walls
                    .class_of(moved)
                    .ok_or_else(|| Error::Assertion("image of an edge is not an edge".into()))?;
            }
            actions.push(image);
        }
        Ok(actions)
    }

    /// Searches for an orientation: one side per wall, constant on
    /// parallelism classes, invariant under the generated group. Returns a
    /// wall-inversion witness when a halfspace reaches its complement.
    pub fn orientation(
        &self,
        generators: &[Permutation],
    ) -> Result<OrientationOutcome> {
        let walls = self.wall_classes()?;
        let actions = self.class_action(&walls, generators)?;
        let k = walls.classes.len();

        // Orbit exploration from each class, recording generator words, to
        // detect a class meeting its own opposite.
        let mut orbit_id = vec![usize::MAX; k];
        let mut orbits: Vec<Vec<usize>> = Vec::new();
        for start in 0..k {
            if orbit_id[start] != usize::MAX {
                continue;
            }
            let id = orbits.len();
            let mut members = Vec::new();
            let mut queue = VecDeque::from([start]);
            let mut path: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            path.insert(start, Vec::new());
            orbit_id[start] = id;
            while let Some(c) = queue.pop_front() {
                members.push(c);
                if walls.opposite[c] != c && path.contains_key(&walls.opposite[c]) {
                    // The orbit reaches both c and its opposite. With
                    // generator words w_c: start → c and w_o: start → opp(c),
                    // the element w_o·w_c⁻¹ carries c to its opposite.
                    let to_c = &path[&c];
                    let to_opp = &path[&walls.opposite[c]];
                    let mut word: Vec<(usize, bool)> =
                        to_opp.iter().rev().map(|&g| (g, false)).collect();
                    word.extend(to_c.iter().map(|&g| (g, true)));
                    return Ok(OrientationOutcome::Inversion(WallInversionWitness {
                        class: c.min(walls.opposite[c]),
                        representative: walls.classes[c.min(walls.opposite[c])].representative,
                        word,
                    }));
                }
                for (g, action) in actions.iter().enumerate() {
                    let next = action[c];
                    if orbit_id[next] == usize::MAX {
                        orbit_id[next] = id;
                        let mut p = path[&c].clone();
                        p.push(g);
                        path.insert(next, p);
                        queue.push_back(next);
                    }
                }
            }
            orbits.push(members);
        }
        // Check inversions across the full orbit partition (a permutation
        // orbit is closed under inverses, so membership alone decides).
        for c in 0..k {
            if orbit_id[c] == orbit_id[walls.opposite[c]] && walls.opposite[c] != c {
                return Err(Error::Assertion(
                    "inversion missed by the breadth-first sweep".into(),
                ));
            }
        }

        let mut status = vec![None::<bool>; k];
        for c in 0..k {
            if status[c].is_some() {
                continue;
            }
            for &member in &orbits[orbit_id[c]] {
                status[member] = Some(true);
                status[walls.opposite[member]] = Some(false);
            }
        }
        let chosen: Vec<usize> = (0..k).filter(|&c| status[c] == Some(true)).collect();
        if chosen.len() != walls.wall_count {
            return Err(Error::Assertion(
                "orientation does not pick one side per wall".into(),
            ));
        }
        Ok(OrientationOutcome::Oriented { chosen })
    }

    /// Builds the cube complex dimension by dimension.
    pub fn cubulate(&self, budget: &Budget) -> Result<CubeComplex> {
        let walls = self.wall_classes()?;
        let n = self.graph.vertex_count();
        // Unoriented wall id per class: number walls by their smaller class.
        let mut wall_id = vec![usize::MAX; walls.classes.len()];
        let mut wall_reps: Vec<usize> = Vec::new();
        for c in 0..walls.classes.len() {
            if wall_id[c] == usize::MAX {
                wall_id[c] = wall_reps.len();
                wall_id[walls.opposite[c]] = wall_reps.len();
                wall_reps.push(c);
            }
        }
        // Per vertex and wall, the neighbor across that wall (median graphs
        // have at most one).
        let mut across: BTreeMap<(u32, usize), u32> = BTreeMap::new();
        for &(a, b) in self.graph.edges() {
            let w = wall_id[walls.class_of((a, b)).expect("edge has a class")];
            if across.insert((a, w), b).is_some() || across.insert((b, w), a).is_some() {
                return Err(Error::Assertion(
                    "two edges at one vertex cross the same wall".into(),
                ));
            }
        }

        let mut complex: Vec<Vec<Cube>> = Vec::new();
        complex.push(
            (0..n as u32)
                .map(|v| Cube {
                    vertices: vec![v],
                    walls: Vec::new(),
                })
                .collect(),
        );
        complex.push(
            self.graph
                .edges()
                .iter()
                .map(|&(a, b)| Cube {
                    vertices: vec![a, b],
                    walls: vec![wall_id[walls.class_of((a, b)).expect("edge class")]],
                })
                .collect(),
        );
        let mut total = n + self.graph.edge_count();
        loop {
            let current = complex.last().expect("at least dimension zero");
            if current.is_empty() {
                complex.pop();
                break;
            }
            let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
            let mut next: Vec<Cube> = Vec::new();
            for cube in current {
                // Try to push the cube across every wall leaving its first
                // vertex.
                'walls: for w in 0..wall_reps.len() {
                    if cube.walls.contains(&w) {
                        continue;
                    }
                    let mut partner = Vec::with_capacity(cube.vertices.len());
                    for &v in &cube.vertices {
                        match across.get(&(v, w)) {
                            Some(&u) => partner.push(u),
                            None => continue 'walls,
                        }
                    }
                    let mut vertices: Vec<u32> =
                        cube.vertices.iter().copied().chain(partner).collect();
                    vertices.sort_unstable();
                    vertices.dedup();
                    if vertices.len() != 2 * cube.vertices.len() || seen.contains(&vertices) {
                        continue;
                    }
                    let mut dims = cube.walls.clone();
                    dims.push(w);
                    dims.sort_unstable();
                    if !self.verify_cube(&vertices, &dims, &walls, &wall_reps) {
                        continue;
                    }
                    total += 1;
                    if total > budget.graph_vertices * 8 {
                        return Err(Error::Budget(format!(
                            "cube complex exceeds {} cells",
                            budget.graph_vertices * 8
                        )));
                    }
                    seen.insert(vertices.clone());
                    next.push(Cube {
                        vertices,
                        walls: dims,
                    });
                }
            }
            next.sort_by(|a, b| a.vertices.cmp(&b.vertices));
            complex.push(next);
        }
        Ok(CubeComplex { cubes: complex })
    }

    /// A candidate vertex set spans a cube exactly when the wall-membership
    /// bit vectors hit every corner once and edges match Hamming distance 1.
    fn verify_cube(
        &self,
        vertices: &[u32],
        dims: &[usize],
        walls: &WallClasses,
        wall_reps: &[usize],
    ) -> bool {
        let d = dims.len();
        if vertices.len() != 1 << d {
            return false;
        }
        let mut patterns = BTreeSet::new();
        let mut bits = Vec::with_capacity(vertices.len());
        for &v in vertices {
            let mut pattern = 0u32;
            for (i, &w) in dims.iter().enumerate() {
                let side = &walls.classes[wall_reps[w]].halfspace;
                if side.contains(v as usize) {
                    pattern |= 1 << i;
                }
            }
            patterns.insert(pattern);
            bits.push(pattern);
        }
        if patterns.len() != vertices.len() {
            return false;
        }
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                let hamming = (bits[i] ^ bits[j]).count_ones();
                if (hamming == 1) != self.graph.has_edge(u, v) {
                    return false;
                }
            }
        }
        true
    }

    /// Finds a minimal-dimension cube invariant under the group generated by
    /// the given automorphisms, and a fixed corner when an orientation
    /// exists.
    pub fn invariant_cube(
        &self,
        generators: &[Permutation],
        budget: &Budget,
    ) -> Result<InvariantCubeReport> {
        self.validate_automorphisms(generators)?;
        let group = close_permutations(
            generators,
            self.graph.vertex_count(),
            budget.group_closure,
        )?;
        let complex = self.cubulate(budget)?;
        let mut found: Option<&Cube> = None;
        'dims: for dim in &complex.cubes {
            for cube in dim {
                let members: BTreeSet<u32> = cube.vertices.iter().copied().collect();
                let invariant = group.iter().all(|perm| {
                    cube.vertices
                        .iter()
                        .all(|&v| members.contains(&(perm.apply(v as usize, false) as u32)))
                });
                if invariant {
                    found = Some(cube);
                    break 'dims;
                }
            }
        }
        let cube = found.ok_or_else(|| {
            Error::Assertion("no invariant cube found in a finite median graph".into())
        })?;
        let fixed_vertex = match self.orientation(generators)? {
            OrientationOutcome::Inversion(_) => None,
            OrientationOutcome::Oriented { chosen } => {
                let walls = self.wall_classes()?;
                let chosen: BTreeSet<usize> = chosen.into_iter().collect();
                let mut corners: Vec<u32> = cube
                    .vertices
                    .iter()
                    .copied()
                    .filter(|&v| {
                        cube.walls.iter().all(|&w| {
                            // The chosen class of this wall: the one whose
                            // halfspace contains v decides the corner.
                            let (c1, _) = wall_class_pair(&walls, w);
                            let class = if chosen.contains(&c1) {
                                c1
                            } else {
                                walls.opposite[c1]
                            };
                            walls.classes[class].halfspace.contains(v as usize)
                        })
                    })
                    .collect();
                if corners.len() != 1 {
                    return Err(Error::Assertion(format!(
                        "oriented cube has {} distinguished corners",
                        corners.len()
                    )));
                }
                corners.pop()
            }
        };
        Ok(InvariantCubeReport {
            cube: cube.vertices.clone(),
            dimension: cube.walls.len(),
            fixed_vertex,
            group_order: group.len(),
        })
    }

    /// Embeds vertices as finite sets of oriented classes, relative to a
    /// basepoint; symmetric differences realize twice the graph distance.
    pub fn embed_into_powerset(&self, basepoint: u32) -> Result<PowersetEmbedding> {
        self.check_vertex(basepoint)?;
        if !self.graph.is_connected() {
            return Err(Error::Validation(
                "power-set embedding needs a connected graph".into(),
            ));
        }
        let walls = self.wall_classes()?;
        let n = self.graph.vertex_count();
        let mut images: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
        for v in 0..n {
            let image: BTreeSet<usize> = walls
                .classes
                .iter()
                .enumerate()
                .filter(|(_, class)| {
                    class.halfspace.contains(v) != class.halfspace.contains(basepoint as usize)
                })
                .map(|(id, _)| id)
                .collect();
            images.push(image);
        }
        let mut doubled_isometry = true;
        for x in 0..n {
            for y in x..n {
                let sym = images[x].symmetric_difference(&images[y]).count() as u32;
                if sym != 2 * self.dist[x][y] {
                    doubled_isometry = false;
                }
            }
        }
        Ok(PowersetEmbedding {
            basepoint,
            images,
            doubled_isometry,
        })
    }
}

/// Comparison of vertex displacement against the translate distance of the
/// halfspace sets, over sampled words.
#[derive(Debug, Clone, Serialize)]
pub struct DisplacementReport {
    pub vertex: u32,
    /// `(word, distance d(v, g·v), ℓ over all classes, ℓ over the chosen
    /// orientation if one exists)`.
    pub rows: Vec<(String, u32, u64, Option<u64>)>,
    /// ℓ over all oriented classes equals twice the displacement.
    pub doubled_matches: bool,
    /// ℓ over an invariant orientation equals the displacement exactly.
    pub oriented_matches: Option<bool>,
}

impl MedianGraph {
    /// Realizes the displacement function `g ↦ d(v, g·v)` as the translate
    /// distance of a commensurated set: the group acts on the finite set of
    /// oriented classes, commensurating the classes around `v`. Over all
    /// classes the translate distance is `2·d`; restricted to an invariant
    /// orientation it is exactly `d`.
    pub fn displacement_check(
        &self,
        generators: &[Permutation],
        vertex: u32,
        words: &[crate::words::Word],
    ) -> Result<DisplacementReport> {
        use std::sync::Arc;
        self.check_vertex(vertex)?;
        let walls = self.wall_classes()?;
        let actions = self.class_action(&walls, generators)?;
        let k = walls.classes.len();
        let names: Vec<String> = (0..generators.len()).map(|i| format!("g{i}")).collect();
        let alphabet = crate::words::Alphabet::new(&names)?;
        let tokens: Vec<String> = (0..k).map(|c| format!("c{c}")).collect();
        let perms: Vec<Permutation> = actions
            .iter()
            .map(|image| Permutation::new(image.clone()))
            .collect::<Result<_>>()?;
        let class_set = Arc::new(crate::gset::GSet::explicit(
            "halfspace-classes",
            alphabet.clone(),
            crate::gset::ExplicitAction::new(tokens, perms)?,
        )?);
        let around: Vec<&str> = (0..k)
            .filter(|&c| walls.classes[c].halfspace.contains(vertex as usize))
            .map(|c| &*class_set.explicit_action().expect("explicit").tokens()[c])
            .collect();
        let around_tokens: Vec<&str> = around;
        let all_subset = crate::commens::CommensuratedSet::from_tokens(
            Arc::clone(&class_set),
            &around_tokens.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        )?;
        let orientation = self.orientation(generators)?;
        let oriented_subset = match &orientation {
            OrientationOutcome::Oriented { chosen } => {
                let chosen: BTreeSet<usize> = chosen.iter().copied().collect();
                let tokens: Vec<String> = (0..k)
                    .filter(|&c| {
                        chosen.contains(&c)
                            && walls.classes[c].halfspace.contains(vertex as usize)
                    })
                    .map(|c| format!("c{c}"))
                    .collect();
                Some(crate::commens::CommensuratedSet::from_tokens(
                    Arc::clone(&class_set),
                    &tokens,
                )?)
            }
            OrientationOutcome::Inversion(_) => None,
        };

        let mut rows = Vec::new();
        let mut doubled_matches = true;
        let mut oriented_matches = oriented_subset.as_ref().map(|_| true);
        for word in words {
            // The same word as a vertex permutation, applied right to left.
            let mut image = vertex as usize;
            for letter in word.0.iter().rev() {
                if letter.gen >= generators.len() {
                    return Err(Error::Validation(format!(
                        "word uses generator {}, only {} given",
                        letter.gen,
                        generators.len()
                    )));
                }
                image = generators[letter.gen].apply(image, letter.inv);
            }
            let d = self.dist[vertex as usize][image];
            let ell_all = all_subset.ell(word)?;
            if ell_all != 2 * u64::from(d) {
                doubled_matches = false;
            }
            let ell_oriented = match &oriented_subset {
                Some(subset) => {
                    let e = subset.ell(word)?;
                    if e != u64::from(d) {
                        oriented_matches = Some(false);
                    }
                    Some(e)
                }
                None => None,
            };
            rows.push((alphabet.format_word(word), d, ell_all, ell_oriented));
        }
        Ok(DisplacementReport {
            vertex,
            rows,
            doubled_matches,
            oriented_matches,
        })
    }
}

fn wall_class_pair(walls: &WallClasses, wall: usize) -> (usize, usize) {
    // Walls are numbered by first-encountered class id.
    let mut seen = 0usize;
    for c in 0..walls.classes.len() {
        if c <= walls.opposite[c] {
            if seen == wall {
                return (c, walls.opposite[c]);
            }
            seen += 1;
        }
    }
    unreachable!("wall id out of range")
}

/// Closure of a set of permutations under composition, up to `limit`
/// elements, identity included.
pub fn close_permutations(
    generators: &[Permutation],
    n: usize,
    limit: usize,
) -> Result<Vec<Permutation>> {
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let identity = Permutation::identity(n);
    seen.insert(identity.images().to_vec());
    let mut out = vec![identity];
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        for gen in generators {
            let next = gen.compose(&out[i]);
            if seen.insert(next.images().to_vec()) {
                if out.len() >= limit {
                    return Err(Error::Budget(format!(
                        "permutation group exceeds {limit} elements"
                    )));
                }
                out.push(next);
                queue.push_back(out.len() - 1);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{graph_fixture, hypercube_graph};

    fn budget() -> Budget {
        Budget::default()
    }

    #[test]
    fn hypercube_is_median_triangle_is_not() {
        let q3 = hypercube_graph(3);
        assert!(is_median(&q3, &budget()).unwrap().median);
        let k3 = graph_fixture("complete:3").unwrap();
        let verdict = is_median(&k3, &budget()).unwrap();
        assert_eq!(verdict.counterexample, Some((0, 1, 2)));
    }

    #[test]
    fn six_cycle_counterexample() {
        let c6 = graph_fixture("cycle:6").unwrap();
        let verdict = is_median(&c6, &budget()).unwrap();
        assert_eq!(verdict.counterexample, Some((0, 2, 4)));
    }

    #[test]
    fn median_is_coordinatewise_majority() {
        let mg = MedianGraph::new(hypercube_graph(3), &budget()).unwrap();
        // Labels: vertex id bits are coordinates; 000=0, 011=3... median of
        // 000, 011, 101 is 001 (majority per bit), i.e. id 1.
        assert_eq!(mg.median(0, 3, 5).unwrap(), 1);
        assert_eq!(mg.median(2, 2, 7).unwrap(), 2);
        let star = MedianGraph::new(graph_fixture("star:3").unwrap(), &budget()).unwrap();
        assert_eq!(star.median(1, 2, 3).unwrap(), 0);
    }

    #[test]
    fn halfspace_shapes() {
        let path = MedianGraph::new(graph_fixture("path:3").unwrap(), &budget()).unwrap();
        let h = path.halfspace(0, 1).unwrap();
        assert_eq!(h.side.to_sorted_vec(), vec![0]);

        let q3 = MedianGraph::new(hypercube_graph(3), &budget()).unwrap();
        for &(a, b) in q3.graph().edges() {
            assert_eq!(q3.halfspace(a, b).unwrap().side.len(), 4);
        }

        let tree = MedianGraph::new(graph_fixture("tree:3,12").unwrap(), &budget()).unwrap();
        for &(a, b) in tree.graph().edges() {
            let h = tree.halfspace(a, b).unwrap();
            assert!(h.side.contains(a as usize));
            assert!(!h.side.contains(b as usize));
        }
    }

    #[test]
    fn separation_counts_match_distance() {
        let q3 = MedianGraph::new(hypercube_graph(3), &budget()).unwrap();
        assert_eq!(q3.separating_halfspaces(0, 7).unwrap().len(), 3);
        assert_eq!(q3.separating_halfspaces(2, 2).unwrap().len(), 0);
        let path = MedianGraph::new(graph_fixture("path:6").unwrap(), &budget()).unwrap();
        assert_eq!(path.separating_halfspaces(0, 5).unwrap().len(), 5);
    }

    #[test]
    fn wall_class_counts() {
        let q3 = MedianGraph::new(hypercube_graph(3), &budget()).unwrap();
        let walls = q3.wall_classes().unwrap();
        assert_eq!(walls.wall_count, 3);
        assert_eq!(walls.oriented_count(), 6);
        for class in &walls.classes {
            assert_eq!(class.size, 4);
        }

        let tree = MedianGraph::new(graph_fixture("tree:5,20").unwrap(), &budget()).unwrap();
        let walls = tree.wall_classes().unwrap();
        assert_eq!(walls.wall_count, 19);

        let edge = MedianGraph::new(graph_fixture("path:2").unwrap(), &budget()).unwrap();
        let walls = edge.wall_classes().unwrap();
        assert_eq!((walls.wall_count, walls.oriented_count()), (1, 2));
    }

    #[test]
    fn orientation_and_inversion() {
        let q3 = MedianGraph::new(hypercube_graph(3), &budget()).unwrap();
        match q3.orientation(&[]).unwrap() {
            OrientationOutcome::Oriented { chosen } => {
                assert_eq!(chosen.len(), 3);
                // The upward orientation: oriented edges start at the lower
                // vertex, so every chosen halfspace contains 000.
                let walls = q3.wall_classes().unwrap();
                for c in chosen {
                    assert!(walls.classes[c].halfspace.contains(0));
                }
            }
            OrientationOutcome::Inversion(_) => panic!("hypercube has no inversion"),
        }

        let c4 = MedianGraph::new(graph_fixture("cycle:4").unwrap(), &budget()).unwrap();
        let rotation = Permutation::new(vec![1, 2, 3, 0]).unwrap();
        match c4.orientation(&[rotation]).unwrap() {
            OrientationOutcome::Inversion(witness) => {
                assert!(!witness.word.is_empty());
            }
            OrientationOutcome::Oriented { .. } => panic!("rotation inverts a wall"),
        }

        let path = MedianGraph::new(graph_fixture("path:4").unwrap(), &budget()).unwrap();
        let id = Permutation::identity(4);
        assert!(matches!(
            path.orientation(&[id]).unwrap(),
            OrientationOutcome::Oriented { .. }
        ));
    }

    #[test]
    fn cube_complex_counts() {
        let q3 = MedianGraph::new(hypercube_graph(3), &budget()).unwrap();
        assert_eq!(q3.cubulate(&budget()).unwrap().counts(), vec![8, 12, 6, 1]);

        let grid = MedianGraph::new(graph_fixture("grid:3,3").unwrap(), &budget()).unwrap();
        assert_eq!(grid.cubulate(&budget()).unwrap().counts(), vec![9, 12, 4]);

        let tree = MedianGraph::new(graph_fixture("tree:9,16").unwrap(), &budget()).unwrap();
        assert_eq!(tree.cubulate(&budget()).unwrap().counts(), vec![16, 15]);
    }

    #[test]
    fn invariant_cubes_and_fixed_vertices() {
        let path = MedianGraph::new(graph_fixture("path:3").unwrap(), &budget()).unwrap();
        let swap = Permutation::new(vec![2, 1, 0]).unwrap();
        let report = path.invariant_cube(&[swap], &budget()).unwrap();
        assert_eq!(report.fixed_vertex, Some(1));

        let c4 = MedianGraph::new(graph_fixture("cycle:4").unwrap(), &budget()).unwrap();
        let rotation = Permutation::new(vec![1, 2, 3, 0]).unwrap();
        let report = c4.invariant_cube(&[rotation], &budget()).unwrap();
        assert_eq!(report.dimension, 2);
        assert_eq!(report.fixed_vertex, None);
        assert_eq!(report.group_order, 4);

        // Cycling the three coordinates of the cube: bit i -> bit i+1.
        let q3 = MedianGraph::new(hypercube_graph(3), &budget()).unwrap();
        let cycle = Permutation::new(
            (0..8)
                .map(|v: usize| ((v << 1) | (v >> 2)) & 0b111)
                .collect(),
        )
        .unwrap();
        let report = q3.invariant_cube(&[cycle], &budget()).unwrap();
        assert_eq!(report.dimension, 0);
        assert!(report.fixed_vertex == Some(0) || report.fixed_vertex == Some(7));
    }

    #[test]
    fn displacement_equals_class_translate_distance() {
        use crate::words::{Alphabet, Word};
        let q3 = MedianGraph::new(hypercube_graph(3), &budget()).unwrap();
        // Translation by 100 (xor with bit 0) and the coordinate 3-cycle.
        let xor1 = Permutation::new((0..8).map(|v| v ^ 1).collect()).unwrap();
        let cycle = Permutation::new(
            (0..8)
                .map(|v: usize| ((v << 1) | (v >> 2)) & 0b111)
                .collect(),
        )
        .unwrap();
        let alphabet = Alphabet::new(&["g0", "g1"]).unwrap();
        let words: Vec<Word> = ["g0", "g1", "g0 g1", "g1 g0 g0", "g0'"]
            .iter()
            .map(|w| alphabet.parse_word(w).unwrap())
            .collect();
        // The xor translation inverts its own wall, so only the doubled
        // identity is available for it.
        let report = q3
            .displacement_check(&[xor1, cycle.clone()], 0, &words)
            .unwrap();
        assert!(report.doubled_matches);
        assert_eq!(report.oriented_matches, None);

        // Coordinate permutations preserve the canonical orientation.
        let alphabet1 = Alphabet::new(&["g0"]).unwrap();
        let cycle_words: Vec<Word> = ["g0", "g0 g0", "g0'"]
            .iter()
            .map(|w| alphabet1.parse_word(w).unwrap())
            .collect();
        let report = q3.displacement_check(&[cycle], 1, &cycle_words).unwrap();
        assert!(report.doubled_matches);
        assert_eq!(report.oriented_matches, Some(true));

        let tree = MedianGraph::new(graph_fixture("tree:2,9").unwrap(), &budget()).unwrap();
        let id = Permutation::identity(9);
        let words1 = vec![alphabet1.parse_word("g0").unwrap()];
        let report = tree.displacement_check(&[id], 3, &words1).unwrap();
        assert!(report.doubled_matches);
        assert_eq!(report.oriented_matches, Some(true));
    }

    #[test]
    fn powerset_embedding_doubles_distances() {
        let q3 = MedianGraph::new(hypercube_graph(3), &budget()).unwrap();
        let embedding = q3.embed_into_powerset(0).unwrap();
        assert!(embedding.doubled_isometry);
        assert!(embedding.images[0].is_empty());
        assert_eq!(embedding.images[7].len(), 6);
        let (x, y) = (1, 3);
        assert_eq!(
            embedding.images[x].symmetric_difference(&embedding.images[y]).count(),
            2
        );
    }
}
