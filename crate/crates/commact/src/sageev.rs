//! Involutive preordered sets, ultraselection enumeration, and finite
//! window truncations of the selection graph of a commensurating action
//! equipped with a membership-swapping involution.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::commens::CommensuratedSet;
use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::gset::{GSet, PointOracle, Token};
use crate::median;
use crate::words::{word_ball, Letter, Word};

/// Finite preordered set `(E, ≤)` with an order-reversing involution σ.
///
/// The relation is stored exactly as given: nothing is closed up behind the
/// caller's back, so [`validate_preposet`] can report missing reflexive or
/// transitive pairs instead of silently repairing them. At most 64 elements
/// are representable (rows are single-word bitmasks); enumeration applies
/// the tighter `preposet_elements` budget.
#[derive(Debug, Clone)]
pub struct InvolutivePreposet {
    elements: Vec<Token>,
    /// Bit `j` of `le[i]` is set when `elements[i] ≤ elements[j]`.
    le: Vec<u64>,
    sigma: Vec<usize>,
}

/// JSON form: `{"elements": [...], "le": [[i,j],...], "sigma": [...]}`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PreposetJson {
    elements: Vec<String>,
    le: Vec<(usize, usize)>,
    sigma: Vec<usize>,
}

impl InvolutivePreposet {
    pub fn new(elements: Vec<Token>, le_pairs: &[(usize, usize)], sigma: Vec<usize>) -> Result<Self> {
        let n = elements.len();
        if n > 64 {
            return Err(Error::Validation(format!(
                "at most 64 preposet elements are representable, got {n}"
            )));
        }
        if sigma.len() != n {
            return Err(Error::Validation(format!(
                "sigma must list one image per element ({} given, {n} needed)",
                sigma.len()
            )));
        }
        if let Some(&img) = sigma.iter().find(|&&img| img >= n) {
            return Err(Error::Validation(format!(
                "sigma image {img} out of range 0..{n}"
            )));
        }
        let mut le = vec![0u64; n];
        for &(i, j) in le_pairs {
            if i >= n || j >= n {
                return Err(Error::Validation(format!(
                    "relation pair ({i}, {j}) out of range 0..{n}"
                )));
            }
            le[i] |= 1 << j;
        }
        Ok(InvolutivePreposet { elements, le, sigma })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PreposetJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("preposet: {e}")))?;
        InvolutivePreposet::new(raw.elements, &raw.le, raw.sigma)
    }

    pub fn to_json(&self) -> String {
        let le = (0..self.len())
            .flat_map(|i| {
                let row = self.le[i];
                (0..self.len()).filter_map(move |j| (row >> j & 1 == 1).then_some((i, j)))
            })
            .collect();
        let raw = PreposetJson {
            elements: self.elements.clone(),
            le,
            sigma: self.sigma.clone(),
        };
        serde_json::to_string(&raw).expect("preposet serializes")
    }

    /// Discrete order (only `x ≤ x`) on `pairs` two-element σ-orbits.
    #[must_use]
    pub fn discrete(pairs: usize) -> Self {
        assert!(pairs <= 32, "discrete preposet capped at 32 pairs");
        let n = 2 * pairs;
        let elements = (0..pairs)
            .flat_map(|i| [format!("a{i}"), format!("a{i}'")])
            .collect();
        let le = (0..n).map(|i| 1u64 << i).collect();
        let sigma = (0..n).map(|i| i ^ 1).collect();
        InvolutivePreposet { elements, le, sigma }
    }

    /// A chain `c0 < c1 < ... < c_{k-1}` glued to its reversed σ-copy.
    #[must_use]
    pub fn chain_with_reversal(k: usize) -> Self {
        assert!(k <= 32, "chain preposet capped at 32 pairs");
        let n = 2 * k;
        let mut elements: Vec<Token> = (0..k).map(|i| format!("c{i}")).collect();
        elements.extend((0..k).map(|i| format!("c{i}'")));
        let mut le = vec![0u64; n];
        for i in 0..k {
            for j in i..k {
                le[i] |= 1 << j;
                le[k + j] |= 1 << (k + i);
            }
        }
        let sigma = (0..n).map(|i| (i + k) % n).collect();
        InvolutivePreposet { elements, le, sigma }
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    #[must_use]
    pub fn elements(&self) -> &[Token] {
        &self.elements
    }

    #[must_use]
    pub fn sigma(&self, i: usize) -> usize {
        self.sigma[i]
    }

    #[must_use]
    pub fn le(&self, i: usize, j: usize) -> bool {
        self.le[i] >> j & 1 == 1
    }

    /// Strictly-above bitmask: `x < y` means `x ≤ y` and `x ≠ y`.
    fn strict_up(&self, i: usize) -> u64 {
        self.le[i] & !(1 << i)
    }

    /// Image of a subset bitmask under σ.
    fn sigma_mask(&self, mask: u64) -> u64 {
        let mut out = 0u64;
        for i in 0..self.len() {
            if mask >> i & 1 == 1 {
                out |= 1 << self.sigma[i];
            }
        }
        out
    }

    fn full_mask(&self) -> u64 {
        if self.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }
}

/// First structural defect of a claimed involutive preposet, as a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreposetViolation {
    NotReflexive { element: usize },
    NotTransitive { x: usize, y: usize, z: usize },
    SigmaNotInvolutive { element: usize },
    /// σ(x) = x is incompatible with the partition condition σ(S) = E∖S.
    SigmaFixedPoint { element: usize },
    /// `x ≤ y` but not `σ(y) ≤ σ(x)`.
    NotOrderReversing { x: usize, y: usize },
}

/// Checks reflexivity, transitivity, the involution laws, and
/// order-reversal, in that order, and returns the first violation found.
#[must_use]
pub fn validate_preposet(p: &InvolutivePreposet) -> Option<PreposetViolation> {
    let n = p.len();
    for i in 0..n {
        if !p.le(i, i) {
            return Some(PreposetViolation::NotReflexive { element: i });
        }
    }
    for x in 0..n {
        for y in 0..n {
            if p.le(x, y) {
                let missing = p.le[y] & !p.le[x];
                if missing != 0 {
                    let z = missing.trailing_zeros() as usize;
                    return Some(PreposetViolation::NotTransitive { x, y, z });
                }
            }
        }
    }
    for i in 0..n {
        if p.sigma[p.sigma[i]] != i {
            return Some(PreposetViolation::SigmaNotInvolutive { element: i });
        }
    }
    for i in 0..n {
        if p.sigma[i] == i {
            return Some(PreposetViolation::SigmaFixedPoint { element: i });
        }
    }
    for x in 0..n {
        for y in 0..n {
            if p.le(x, y) && !p.le(p.sigma[y], p.sigma[x]) {
                return Some(PreposetViolation::NotOrderReversing { x, y });
            }
        }
    }
    None
}

/// Subset `S ⊆ E` that is upward closed under `<` and complementary to its
/// own σ-image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ultraselection {
    pub mask: u64,
}

impl Ultraselection {
    #[must_use]
    pub fn contains(&self, i: usize) -> bool {
        self.mask >> i & 1 == 1
    }

    #[must_use]
    pub fn tokens(&self, p: &InvolutivePreposet) -> Vec<Token> {
        (0..p.len())
            .filter(|&i| self.contains(i))
            .map(|i| p.elements[i].clone())
            .collect()
    }

    fn label(&self, p: &InvolutivePreposet) -> String {
        format!("{{{}}}", self.tokens(p).join(","))
    }
}

fn is_ultraselection(p: &InvolutivePreposet, mask: u64) -> bool {
    if p.sigma_mask(mask) != !mask & p.full_mask() {
        return false;
    }
    (0..p.len()).all(|i| mask >> i & 1 == 0 || p.strict_up(i) & !mask == 0)
}

/// All ultraselections of `p`, by backtracking over the σ-orbit pairs in
/// element order and pruning branches that already break the selection
/// condition. The result is duplicate-free, sorted ascending by member
/// bitmask, and re-verified against both defining conditions.
pub fn enumerate_ultraselections(
    p: &InvolutivePreposet,
    budget: &Budget,
) -> Result<Vec<Ultraselection>> {
    if p.len() > budget.preposet_elements {
        return Err(Error::Budget(format!(
            "ultraselection enumeration capped at {} elements, preposet has {}",
            budget.preposet_elements,
            p.len()
        )));
    }
    if let Some(v) = validate_preposet(p) {
        return Err(Error::Validation(format!(
            "not an involutive preposet: {v:?}"
        )));
    }
    let pair_reps: Vec<usize> = (0..p.len()).filter(|&i| i < p.sigma[i]).collect();
    let strict_up: Vec<u64> = (0..p.len()).map(|i| p.strict_up(i)).collect();
    let mut strict_down = vec![0u64; p.len()];
    for (i, &up) in strict_up.iter().enumerate() {
        let mut bits = up;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            strict_down[j] |= 1 << i;
        }
    }

    let mut out = Vec::new();
    // Depth-first over (next pair index, chosen mask, excluded mask).
    let mut stack = vec![(0usize, 0u64, 0u64)];
    while let Some((k, chosen, excluded)) = stack.pop() {
        if k == pair_reps.len() {
            out.push(Ultraselection { mask: chosen });
            if out.len() > budget.ultraselections {
                return Err(Error::Budget(format!(
                    "more than {} ultraselections",
                    budget.ultraselections
                )));
            }
            continue;
        }
        let x = pair_reps[k];
        let y = p.sigma[x];
        // Later-pushed branch pops first; push "σ(x) ∈ S" below "x ∈ S" so
        // that smaller representatives enter S first.
        for (inside, outside) in [(y, x), (x, y)] {
            let new_chosen = chosen | 1 << inside;
            let new_excluded = excluded | 1 << outside;
            if strict_up[inside] & new_excluded == 0 && strict_down[outside] & new_chosen == 0 {
                stack.push((k + 1, new_chosen, new_excluded));
            }
        }
    }
    out.sort_unstable();
    for s in &out {
        if !is_ultraselection(p, s.mask) {
            return Err(Error::Assertion(format!(
                "enumerated set {:?} fails the ultraselection conditions",
                s.tokens(p)
            )));
        }
    }
    Ok(out)
}

/// Ultraselections of `p` together with the graph joining two of them
/// exactly when their symmetric difference has two elements.
///
/// Asserts the component structure this graph must have. A single
/// incidence step flips one σ-pair, and a pair can be flipped alone only
/// when its elements are order-equivalent to nothing else, so two
/// ultraselections share a component exactly when they agree on every
/// order-equivalence class with two or more elements; within a component,
/// graph distance equals `#(S △ T) / 2`. In particular the graph is
/// connected whenever the preorder is antisymmetric.
pub fn incidence_graph(
    p: &InvolutivePreposet,
    budget: &Budget,
) -> Result<(Vec<Ultraselection>, FiniteGraph)> {
    let sels = enumerate_ultraselections(p, budget)?;
    if sels.len() > budget.graph_vertices {
        return Err(Error::Budget(format!(
            "incidence graph capped at {} vertices, preposet has {} ultraselections",
            budget.graph_vertices,
            sels.len()
        )));
    }
    let mut edges = Vec::new();
    for (i, s) in sels.iter().enumerate() {
        for (j, t) in sels.iter().enumerate().skip(i + 1) {
            if (s.mask ^ t.mask).count_ones() == 2 {
                edges.push((i as u32, j as u32));
            }
        }
    }
    let labels = sels.iter().map(|s| s.label(p)).collect();
    let graph = FiniteGraph::new(sels.len(), edges, Some(labels))?;
    // equivalent[i]: elements order-equivalent to i (always includes i).
    let equivalent: Vec<u64> = (0..p.len())
        .map(|i| {
            (0..p.len())
                .filter(|&j| p.le(i, j) && p.le(j, i))
                .fold(0u64, |m, j| m | 1 << j)
        })
        .collect();
    let dist = graph.distances(budget)?;
    for (i, s) in sels.iter().enumerate() {
        for (j, t) in sels.iter().enumerate().skip(i + 1) {
            let diff = s.mask ^ t.mask;
            if dist[i][j] == crate::graph::UNREACHABLE {
                let split_class = (0..p.len()).any(|z| {
                    diff >> z & 1 == 1
                        && equivalent[z].count_ones() >= 2
                        && equivalent[z] & !diff == 0
                });
                if !split_class {
                    return Err(Error::Assertion(format!(
                        "{:?} and {:?} agree on every multi-element equivalence class \
                         but are in different components",
                        s.tokens(p),
                        t.tokens(p)
                    )));
                }
                continue;
            }
            let expect = u64::from(diff.count_ones() / 2);
            if u64::from(dist[i][j]) != expect {
                return Err(Error::Assertion(format!(
                    "incidence distance between {:?} and {:?} is {}, expected {expect}",
                    s.tokens(p),
                    t.tokens(p),
                    dist[i][j]
                )));
            }
        }
    }
    Ok((sels, graph))
}

/// Whether the ultraselection graph of `p` is median. A `false` here
/// contradicts a theorem, so callers treat it as a defect detector.
pub fn check_sageev_median(p: &InvolutivePreposet, budget: &Budget) -> Result<bool> {
    let (_, graph) = incidence_graph(p, budget)?;
    Ok(median::is_median(&graph, budget)?.median)
}

/// Random involutive preposet on `pairs` σ-orbits, for property tests.
///
/// Seeds a random strict relation and then closes it under reflexivity,
/// transitivity, and order-reversal, so the result always validates.
#[must_use]
pub fn random_preposet(seed: u64, pairs: usize) -> InvolutivePreposet {
    assert!(pairs <= 32, "random preposet capped at 32 pairs");
    let n = 2 * pairs;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut p = InvolutivePreposet::discrete(pairs);
    if n > 1 {
        for _ in 0..n {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i != j && p.sigma[i] != j {
                p.le[i] |= 1 << j;
            }
        }
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if p.le(i, j) {
                    let rev = 1 << p.sigma[i];
                    if p.le[p.sigma[j]] & rev == 0 {
                        p.le[p.sigma[j]] |= rev;
                        changed = true;
                    }
                    let grown = p.le[i] | p.le[j];
                    if grown != p.le[i] {
                        p.le[i] = grown;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    // Closure can accidentally relate a pair to its own σ-partner; that is
    // legal (x ≤ σ(x) is allowed), so nothing to repair here.
    p
}

// ---------------------------------------------------------------------------
// Double construction
// ---------------------------------------------------------------------------

const SIDE_SEPARATOR: char = '|';

fn doubled_token(base: &str, side: u8) -> Token {
    format!("{base}{SIDE_SEPARATOR}{side}")
}

/// Splits `"x|0"` / `"x|1"` into the base token and the side flag.
pub fn split_doubled(token: &str) -> Result<(String, u8)> {
    let (base, side) = token
        .rsplit_once(SIDE_SEPARATOR)
        .ok_or_else(|| Error::Parse(format!("doubled token {token:?} has no side flag")))?;
    match side {
        "0" => Ok((base.to_string(), 0)),
        "1" => Ok((base.to_string(), 1)),
        _ => Err(Error::Parse(format!(
            "doubled token {token:?} must end in |0 or |1"
        ))),
    }
}

struct DoubledOracle {
    base: Arc<GSet>,
}

impl PointOracle for DoubledOracle {
    fn apply(&self, letter: Letter, point: &str) -> Result<Token> {
        let (x, side) = split_doubled(point)?;
        Ok(doubled_token(&self.base.apply_letter(letter, &x)?, side))
    }

    fn seeds(&self) -> Vec<Token> {
        self.base
            .seeds()
            .iter()
            .flat_map(|x| [doubled_token(x, 0), doubled_token(x, 1)])
            .collect()
    }

    fn describe(&self) -> String {
        format!("two flagged copies of {}", self.base.name)
    }
}

/// Two-copy carrier `X × {0,1}` with the side-swapping involution and the
/// subset `A′ = A × {0} ⊔ A^c × {1}`, which satisfies `X′ = A′ ⊔ σ(A′)`.
pub struct DoubledAction {
    pub gset: Arc<GSet>,
    pub subset: CommensuratedSet,
}

impl DoubledAction {
    /// The involution: swaps the side flag, fixing the base point.
    pub fn sigma(token: &str) -> Result<Token> {
        let (base, side) = split_doubled(token)?;
        Ok(doubled_token(&base, 1 - side))
    }
}

/// Builds the doubled action of `subset` and checks, on the seeds and the
/// declared difference sets, that membership and σ-membership partition the
/// carrier, and that every sampled word displaces the doubled subset by
/// exactly twice its displacement of the original.
pub fn double_construction(subset: &CommensuratedSet, samples: &[Word]) -> Result<DoubledAction> {
    let base_gset = Arc::clone(subset.gset());
    let gset = Arc::new(GSet::oracle(
        &format!("{}-doubled", base_gset.name),
        base_gset.alphabet.clone(),
        Arc::new(DoubledOracle {
            base: Arc::clone(&base_gset),
        }),
    ));
    let inner = subset.clone();
    let membership = Arc::new(move |token: &str| -> Result<bool> {
        let (x, side) = split_doubled(token)?;
        let in_a = inner.member(&x)?;
        Ok(if side == 0 { in_a } else { !in_a })
    });
    let diffs = (0..base_gset.alphabet.len())
        .map(|gen| {
            subset
                .diff_set(gen)
                .iter()
                .flat_map(|x| [doubled_token(x, 0), doubled_token(x, 1)])
                .collect()
        })
        .collect();
    let doubled = CommensuratedSet::from_oracle(Arc::clone(&gset), membership, diffs)?;

    let mut probes: Vec<Token> = gset.seeds();
    for gen in 0..base_gset.alphabet.len() {
        probes.extend(doubled.diff_set(gen).iter().cloned());
    }
    probes.sort();
    probes.dedup();
    for t in &probes {
        let swapped = DoubledAction::sigma(t)?;
        if doubled.member(t)? == doubled.member(&swapped)? {
            return Err(Error::Assertion(format!(
                "{t:?} and its σ-image are on the same side of the doubled subset"
            )));
        }
    }
    for w in samples {
        let base_ell = subset.ell(w)?;
        let doubled_ell = doubled.ell(w)?;
        if doubled_ell != 2 * base_ell {
            return Err(Error::Assertion(format!(
                "doubling must double displacement: word {w} has {base_ell} before, {doubled_ell} after"
            )));
        }
    }
    Ok(DoubledAction {
        gset,
        subset: doubled,
    })
}

// ---------------------------------------------------------------------------
// Window truncation of the selection graph
// ---------------------------------------------------------------------------

/// Selection graph over a finite σ-closed window of carrier points, with
/// the translates of the base subset marked as principal vertices.
pub struct SageevWindow {
    pub preposet: InvolutivePreposet,
    /// Component of the incidence graph containing the principal vertices.
    pub graph: FiniteGraph,
    /// Ultraselections realizing the component vertices, aligned by index.
    pub vertices: Vec<Ultraselection>,
    /// `(formatted word, component vertex)` per requested translate.
    pub principal: Vec<(String, u32)>,
    /// Total ultraselection count before restricting to the component.
    pub total_ultraselections: usize,
    /// Radius of the word ball that decided the sampled preorder.
    pub ball_radius: usize,
    /// Number of reduced words in that ball.
    pub ball_size: usize,
    /// The preorder is decided by finitely many samples, never exactly.
    pub preorder: &'static str,
    pub component_median: bool,
}

/// Builds the sampled involutive preposet on `window` and the component of
/// its ultraselection graph containing the translate vertices
/// `gA = {x : member(g⁻¹·x)}` for the listed words.
///
/// The preorder `x ≤ y ⟺ W_x ⊆ W_y` is undecidable from finitely many
/// membership queries, so containment is tested over the reduced-word ball
/// of radius `ball_radius` and the ball is recorded in the output. Every
/// listed word must fit inside that ball for its translate to be a genuine
/// ultraselection of the sampled order.
pub fn sageev_window(
    subset: &CommensuratedSet,
    sigma: &dyn Fn(&str) -> Result<Token>,
    window: &[Token],
    words: &[Word],
    ball_radius: usize,
    budget: &Budget,
) -> Result<SageevWindow> {
    let gset = subset.gset();
    let mut elements: Vec<Token> = Vec::new();
    for t in window {
        if !elements.contains(t) {
            elements.push(t.clone());
        }
    }
    let n = elements.len();
    if n > budget.preposet_elements.min(64) {
        return Err(Error::Budget(format!(
            "window capped at {} points, got {n}",
            budget.preposet_elements.min(64)
        )));
    }
    let index: BTreeMap<&str, usize> = elements
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let mut sigma_idx = vec![0usize; n];
    for (i, t) in elements.iter().enumerate() {
        let image = sigma(t)?;
        let &j = index.get(image.as_str()).ok_or_else(|| {
            Error::Validation(format!(
                "window is not σ-closed: σ({t:?}) = {image:?} is outside it"
            ))
        })?;
        if i == j {
            return Err(Error::Validation(format!("σ fixes the window point {t:?}")));
        }
        sigma_idx[i] = j;
        if subset.member(t)? == subset.member(&image)? {
            return Err(Error::Validation(format!(
                "{t:?} and σ({t:?}) are on the same side of the subset, so the \
                 carrier is not partitioned as A ⊔ σ(A)"
            )));
        }
    }
    if words.is_empty() {
        return Err(Error::Validation(
            "at least one group word is required to mark a principal vertex".into(),
        ));
    }
    for w in words {
        if w.len() > ball_radius {
            return Err(Error::Validation(format!(
                "word {w} has length {} but the sampled ball has radius {ball_radius}",
                w.len()
            )));
        }
    }

    // membership_over_ball[i] bit h: window point i lies in (ball word h)·A.
    let ball = word_ball(&gset.alphabet, ball_radius);
    let blocks = ball.len().div_ceil(64);
    let mut membership_over_ball = vec![vec![0u64; blocks]; n];
    for (i, x) in elements.iter().enumerate() {
        for (h, w) in ball.iter().enumerate() {
            if subset.member(&gset.apply_word(&w.inverse(), x)?)? {
                membership_over_ball[i][h / 64] |= 1 << (h % 64);
            }
        }
    }
    let mut le_pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let contained = membership_over_ball[i]
                .iter()
                .zip(&membership_over_ball[j])
                .all(|(a, b)| a & !b == 0);
            if contained {
                le_pairs.push((i, j));
            }
        }
    }
    let preposet = InvolutivePreposet::new(elements.clone(), &le_pairs, sigma_idx)?;
    if let Some(v) = validate_preposet(&preposet) {
        return Err(Error::Assertion(format!(
            "sampled window preorder is not an involutive preposet: {v:?}"
        )));
    }

    let (sels, full_graph) = incidence_graph(&preposet, budget)?;
    let mut principal_full = Vec::new();
    for w in words {
        let inv = w.inverse();
        let mut mask = 0u64;
        for (i, x) in elements.iter().enumerate() {
            if subset.member(&gset.apply_word(&inv, x)?)? {
                mask |= 1 << i;
            }
        }
        let v = sels
            .binary_search(&Ultraselection { mask })
            .map_err(|_| {
                Error::Assertion(format!(
                    "translate of the subset by {w} is not among the enumerated ultraselections"
                ))
            })?;
        principal_full.push((gset.alphabet.format_word(w), v));
    }

    let components = full_graph.components();
    let home = components
        .iter()
        .position(|c| c.binary_search(&principal_full[0].1).is_ok())
        .expect("vertex belongs to some component");
    for (w, v) in &principal_full {
        if components[home].binary_search(v).is_err() {
            return Err(Error::Assertion(format!(
                "principal vertex for {w} landed outside the component of {}",
                principal_full[0].0
            )));
        }
    }
    let comp = &components[home];
    let old_to_new: BTreeMap<usize, u32> = comp
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new as u32))
        .collect();
    let vertices: Vec<Ultraselection> = comp.iter().map(|&v| sels[v]).collect();
    let comp_edges = full_graph
        .edges()
        .iter()
        .filter_map(|&(a, b)| {
            Some((
                *old_to_new.get(&(a as usize))?,
                *old_to_new.get(&(b as usize))?,
            ))
        })
        .collect();
    let labels = vertices.iter().map(|s| s.label(&preposet)).collect();
    let graph = FiniteGraph::new(comp.len(), comp_edges, Some(labels))?;
    let principal: Vec<(String, u32)> = principal_full
        .iter()
        .map(|(w, v)| (w.clone(), old_to_new[v]))
        .collect();

    let dist = graph.distances(budget)?;
    for (a, (wa, va)) in principal.iter().enumerate() {
        for (wb, vb) in principal.iter().skip(a + 1) {
            let diff = vertices[*va as usize].mask ^ vertices[*vb as usize].mask;
            let expect = u64::from(diff.count_ones() / 2);
            let got = u64::from(dist[*va as usize][*vb as usize]);
            if got != expect {
                return Err(Error::Assertion(format!(
                    "principal vertices for {wa} and {wb} are at distance {got}, \
                     but their translates differ in {expect} window pairs"
                )));
            }
        }
    }
    let component_median = median::is_median(&graph, budget)?.median;

    Ok(SageevWindow {
        preposet,
        graph,
        vertices,
        principal,
        total_ultraselections: sels.len(),
        ball_radius,
        ball_size: ball.len(),
        preorder: "sampled",
        component_median,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{gset_fixture, subset_fixture, SubsetSpec};

    fn budget() -> Budget {
        Budget::default()
    }

    #[test]
    fn validation_finds_each_defect() {
        let p = InvolutivePreposet::discrete(2);
        assert_eq!(validate_preposet(&p), None);

        let no_refl =
            InvolutivePreposet::new(vec!["a".into(), "b".into()], &[(0, 0)], vec![1, 0]).unwrap();
        assert_eq!(
            validate_preposet(&no_refl),
            Some(PreposetViolation::NotReflexive { element: 1 })
        );

        let not_trans = InvolutivePreposet::new(
            (0..4).map(|i| format!("e{i}")).collect(),
            &[(0, 0), (1, 1), (2, 2), (3, 3), (0, 2), (2, 1)],
            vec![1, 0, 3, 2],
        )
        .unwrap();
        assert_eq!(
            validate_preposet(&not_trans),
            Some(PreposetViolation::NotTransitive { x: 0, y: 2, z: 1 })
        );

        let bad_sigma =
            InvolutivePreposet::new(vec!["a".into(), "b".into(), "c".into(), "d".into()],
                &[(0, 0), (1, 1), (2, 2), (3, 3)], vec![1, 2, 0, 3]).unwrap();
        assert_eq!(
            validate_preposet(&bad_sigma),
            Some(PreposetViolation::SigmaNotInvolutive { element: 0 })
        );

        let fixed =
            InvolutivePreposet::new(vec!["a".into()], &[(0, 0)], vec![0]).unwrap();
        assert_eq!(
            validate_preposet(&fixed),
            Some(PreposetViolation::SigmaFixedPoint { element: 0 })
        );

        let not_rev = InvolutivePreposet::new(
            (0..4).map(|i| format!("e{i}")).collect(),
            &[(0, 0), (1, 1), (2, 2), (3, 3), (0, 2)],
            vec![1, 0, 3, 2],
        )
        .unwrap();
        assert_eq!(
            validate_preposet(&not_rev),
            Some(PreposetViolation::NotOrderReversing { x: 0, y: 2 })
        );
    }

    #[test]
    fn discrete_preposet_counts_and_cube() {
        let p = InvolutivePreposet::discrete(3);
        let sels = enumerate_ultraselections(&p, &budget()).unwrap();
        assert_eq!(sels.len(), 8);
        let (_, graph) = incidence_graph(&p, &budget()).unwrap();
        assert_eq!(graph.vertex_count(), 8);
        assert_eq!(graph.edge_count(), 12);
        let degrees: Vec<usize> = (0..8).map(|v| graph.neighbors(v).len()).collect();
        assert!(degrees.iter().all(|&d| d == 3));
        assert!(check_sageev_median(&p, &budget()).unwrap());
    }

    #[test]
    fn comparable_pair_forces_one_selection() {
        let p = InvolutivePreposet::new(
            vec!["a".into(), "a'".into()],
            &[(0, 0), (1, 1), (0, 1)],
            vec![1, 0],
        )
        .unwrap();
        let sels = enumerate_ultraselections(&p, &budget()).unwrap();
        assert_eq!(sels.len(), 1);
        assert_eq!(sels[0].tokens(&p), vec!["a'".to_string()]);
        let (_, graph) = incidence_graph(&p, &budget()).unwrap();
        assert_eq!((graph.vertex_count(), graph.edge_count()), (1, 0));
    }

    #[test]
    fn empty_preposet_has_the_empty_ultraselection() {
        let p = InvolutivePreposet::discrete(0);
        let sels = enumerate_ultraselections(&p, &budget()).unwrap();
        assert_eq!(sels, vec![Ultraselection { mask: 0 }]);
    }

    #[test]
    fn chain_with_reversal_is_a_median_path() {
        let p = InvolutivePreposet::chain_with_reversal(4);
        assert_eq!(validate_preposet(&p), None);
        let (sels, graph) = incidence_graph(&p, &budget()).unwrap();
        // Cuts of a 4-chain: S = {c_i, ..., c_3} ∪ reversed complement.
        assert_eq!(sels.len(), 5);
        assert_eq!(graph.edge_count(), 4);
        assert!(check_sageev_median(&p, &budget()).unwrap());
    }

    #[test]
    fn equivalent_pairs_flip_together_and_disconnect() {
        // b ≤ a ≤ b: the two pairs always move jointly, so the only
        // ultraselections are {a,b} and {a',b'}, four apart and unreachable.
        let p = InvolutivePreposet::new(
            vec!["a".into(), "a'".into(), "b".into(), "b'".into()],
            &[(0, 0), (1, 1), (2, 2), (3, 3), (0, 2), (2, 0), (1, 3), (3, 1)],
            vec![1, 0, 3, 2],
        )
        .unwrap();
        assert_eq!(validate_preposet(&p), None);
        let (sels, graph) = incidence_graph(&p, &budget()).unwrap();
        assert_eq!(sels.len(), 2);
        assert_eq!(graph.edge_count(), 0);
        assert_eq!(graph.components().len(), 2);
        assert!(check_sageev_median(&p, &budget()).unwrap());
    }

    #[test]
    fn random_preposets_validate_and_are_median() {
        for seed in 0..12 {
            let p = random_preposet(seed, 1 + (seed as usize % 4));
            assert_eq!(validate_preposet(&p), None, "seed {seed}");
            assert!(check_sageev_median(&p, &budget()).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn json_round_trip() {
        let p = InvolutivePreposet::chain_with_reversal(2);
        let q = InvolutivePreposet::from_json(&p.to_json()).unwrap();
        assert_eq!(p.elements(), q.elements());
        assert_eq!(p.le, q.le);
        assert_eq!(p.sigma, q.sigma);
        assert!(InvolutivePreposet::from_json("{\"elements\":[\"a\"]}").is_err());
    }

    fn nat_on_line() -> CommensuratedSet {
        let z = gset_fixture("z").unwrap();
        subset_fixture(
            &z,
            &SubsetSpec {
                nat: Some(true),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn doubling_the_ray_doubles_displacement() {
        let nat = nat_on_line();
        let ab = nat.gset().alphabet.clone();
        let samples = vec![
            ab.parse_word("t").unwrap(),
            ab.parse_word("t t t").unwrap(),
            ab.parse_word("t'").unwrap(),
        ];
        let doubled = double_construction(&nat, &samples).unwrap();
        assert_eq!(doubled.subset.ell(&samples[1]).unwrap(), 6);
        assert!(doubled.subset.member("4|0").unwrap());
        assert!(!doubled.subset.member("4|1").unwrap());
        assert!(doubled.subset.member("-2|1").unwrap());
        assert_eq!(DoubledAction::sigma("4|0").unwrap(), "4|1");
    }

    #[test]
    fn empty_subset_doubles_to_the_flagged_copy() {
        let zn = gset_fixture("zn:6").unwrap();
        let empty = subset_fixture(&zn, &SubsetSpec::from_tokens(&[])).unwrap();
        let doubled = double_construction(&empty, &[]).unwrap();
        for x in 0..6 {
            assert!(!doubled.subset.member(&format!("{x}|0")).unwrap());
            assert!(doubled.subset.member(&format!("{x}|1")).unwrap());
        }
    }

    #[test]
    fn window_of_the_doubled_ray_is_a_principal_path() {
        let nat = nat_on_line();
        let ab = nat.gset().alphabet.clone();
        let doubled = double_construction(&nat, &[ab.parse_word("t").unwrap()]).unwrap();
        let window: Vec<Token> = (-5..=5)
            .flat_map(|x| [format!("{x}|0"), format!("{x}|1")])
            .collect();
        let words: Vec<Word> = (-3..=3)
            .map(|g| ab.parse_word("t").unwrap().pow(g))
            .collect();
        let win = sageev_window(
            &doubled.subset,
            &DoubledAction::sigma,
            &window,
            &words,
            8,
            &budget(),
        )
        .unwrap();
        // Cuts of an 11-point doubled chain: 12 ultraselections in a path.
        assert_eq!(win.total_ultraselections, 12);
        assert_eq!(win.graph.vertex_count(), 12);
        assert_eq!(win.graph.edge_count(), 11);
        assert!(win.component_median);
        assert_eq!(win.preorder, "sampled");
        assert_eq!(win.ball_size, 17);
        let dist = win.graph.distances(&budget()).unwrap();
        for (a, (_, va)) in win.principal.iter().enumerate() {
            for (b, (_, vb)) in win.principal.iter().enumerate() {
                let g = a as i64 - 3;
                let h = b as i64 - 3;
                assert_eq!(
                    u64::from(dist[*va as usize][*vb as usize]),
                    g.abs_diff(h),
                    "translates by {g} and {h}"
                );
            }
        }
    }

    #[test]
    fn window_rejects_unclosed_or_unbalanced_input() {
        let nat = nat_on_line();
        let ab = nat.gset().alphabet.clone();
        let doubled = double_construction(&nat, &[]).unwrap();
        let one = vec![ab.parse_word("t").unwrap()];
        let open: Vec<Token> = vec!["0|0".into()];
        assert!(matches!(
            sageev_window(&doubled.subset, &DoubledAction::sigma, &open, &one, 4, &budget()),
            Err(Error::Validation(_))
        ));
        let window: Vec<Token> = vec!["0|0".into(), "0|1".into()];
        let long = vec![ab.parse_word("t t t t t t").unwrap()];
        assert!(matches!(
            sageev_window(&doubled.subset, &DoubledAction::sigma, &window, &long, 4, &budget()),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            sageev_window(&doubled.subset, &DoubledAction::sigma, &window, &[], 4, &budget()),
            Err(Error::Validation(_))
        ));
    }
}
