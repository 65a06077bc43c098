use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::gset::{GSet, Token};
use crate::words::{Letter, Word};

/// Shared membership decision procedure on canonical tokens.
pub type MembershipFn = Arc<dyn Fn(&str) -> Result<bool> + Send + Sync>;

/// Membership test for a subset of a carrier.
#[derive(Clone)]
pub enum Membership {
    /// Bit per carrier index of an explicit action.
    Mask(Arc<Vec<bool>>),
    /// Decision procedure on canonical tokens.
    Oracle(MembershipFn),
}

/// A subset `M` of a `G`-set together with the per-generator difference sets
/// `M △ sM`. Finite difference sets are exactly what makes the translate
/// distance `#(M △ wM)` computable for arbitrary words `w`.
#[derive(Clone)]
pub struct CommensuratedSet {
    gset: Arc<GSet>,
    membership: Membership,
    /// `diff_sets[s]` is `M △ sM`, sorted.
    diff_sets: Vec<Arc<BTreeSet<Token>>>,
}

/// Outcome of [`is_commensurated`].
#[derive(Debug, Clone, Serialize)]
pub struct CommensurationReport {
    pub commensurated: bool,
    /// One size per generator, in alphabet order.
    pub diff_set_sizes: Vec<usize>,
}

impl CommensuratedSet {
    /// Builds from an explicit action by computing every difference set.
    pub fn from_mask(gset: Arc<GSet>, mask: Vec<bool>) -> Result<Self> {
        let action = gset
            .explicit_action()
            .ok_or_else(|| Error::Domain("mask membership requires an explicit carrier".into()))?;
        if mask.len() != action.size() {
            return Err(Error::Validation(format!(
                "mask length {} differs from carrier size {}",
                mask.len(),
                action.size()
            )));
        }
        let mut diff_sets = Vec::with_capacity(gset.alphabet.len());
        for gen in 0..gset.alphabet.len() {
            let mut diff = BTreeSet::new();
            for i in 0..action.size() {
                // x ∈ M △ sM  ⟺  membership differs between x and s⁻¹x.
                let pre = action.apply_index(Letter { gen, inv: true }, i);
                if mask[i] != mask[pre] {
                    diff.insert(action.token(i).to_string());
                }
            }
            diff_sets.push(Arc::new(diff));
        }
        Ok(CommensuratedSet {
            gset,
            membership: Membership::Mask(Arc::new(mask)),
            diff_sets,
        })
    }

    /// Builds from explicit member tokens.
    pub fn from_tokens(gset: Arc<GSet>, members: &[Token]) -> Result<Self> {
        let action = gset
            .explicit_action()
            .ok_or_else(|| Error::Domain("token membership requires an explicit carrier".into()))?;
        let mut mask = vec![false; action.size()];
        for t in members {
            let i = action
                .index_of(t)
                .ok_or_else(|| Error::Validation(format!("member token {t:?} not in carrier")))?;
            if mask[i] {
                return Err(Error::Validation(format!("duplicate member token {t:?}")));
            }
            mask[i] = true;
        }
        Self::from_mask(gset, mask)
    }

    /// Builds from a membership oracle plus declared difference sets.
    ///
    /// Each declared element is checked to really lie in `M △ sM`;
    /// completeness of the declaration is the caller's responsibility and is
    /// what the documentation of each fixture promises.
    pub fn from_oracle(
        gset: Arc<GSet>,
        membership: MembershipFn,
        declared_diffs: Vec<BTreeSet<Token>>,
    ) -> Result<Self> {
        if declared_diffs.len() != gset.alphabet.len() {
            return Err(Error::Config(format!(
                "oracle-backed subset needs one difference set per generator ({} given, {} needed)",
                declared_diffs.len(),
                gset.alphabet.len()
            )));
        }
        for (gen, diff) in declared_diffs.iter().enumerate() {
            for x in diff {
                let pre = gset.apply_letter(Letter { gen, inv: true }, x)?;
                if membership(x)? == membership(&pre)? {
                    return Err(Error::Validation(format!(
                        "declared difference set for generator {} contains {x:?}, \
                         whose membership does not change under the generator",
                        gset.alphabet.name(gen)
                    )));
                }
            }
        }
        Ok(CommensuratedSet {
            gset,
            membership: Membership::Oracle(membership),
            diff_sets: declared_diffs.into_iter().map(Arc::new).collect(),
        })
    }

    #[must_use]
    pub fn gset(&self) -> &Arc<GSet> {
        &self.gset
    }

    pub fn member(&self, token: &str) -> Result<bool> {
        match &self.membership {
            Membership::Mask(mask) => {
                let action = self.gset.explicit_action().expect("mask implies explicit");
                let i = action
                    .index_of(token)
                    .ok_or_else(|| Error::Oracle(format!("token {token:?} not in carrier")))?;
                Ok(mask[i])
            }
            Membership::Oracle(f) => f(token),
        }
    }

    #[must_use]
    pub fn diff_set(&self, gen: usize) -> &BTreeSet<Token> {
        &self.diff_sets[gen]
    }

    /// Member tokens of an explicit carrier, sorted.
    pub fn member_tokens(&self) -> Result<Vec<Token>> {
        let action = self
            .gset
            .explicit_action()
            .ok_or_else(|| Error::Domain("member enumeration requires explicit carrier".into()))?;
        let mut out = Vec::new();
        for i in 0..action.size() {
            if self.member(action.token(i))? {
                out.push(action.token(i).to_string());
            }
        }
        out.sort();
        Ok(out)
    }

    /// Candidate superset of `M △ wM`: the union over letter positions of the
    /// translated per-letter difference sets. Every point whose membership
    /// changes under `w` lies here, so filtering candidates is exact.
    fn candidates(&self, word: &Word) -> Result<BTreeSet<Token>> {
        let mut out = BTreeSet::new();
        let letters: Vec<Letter> = word.letters().collect();
        for (i, letter) in letters.iter().enumerate() {
            let prefix = Word(letters[..i].to_vec());
            // Difference set of a single letter: for an inverse letter it is
            // the generator's difference set pulled back by the generator.
            let base: Vec<Token> = if letter.inv {
                self.diff_sets[letter.gen]
                    .iter()
                    .map(|x| self.gset.apply_letter(Letter { gen: letter.gen, inv: true }, x))
                    .collect::<Result<_>>()?
            } else {
                self.diff_sets[letter.gen].iter().cloned().collect()
            };
            for x in base {
                out.insert(self.gset.apply_word(&prefix, &x)?);
            }
        }
        Ok(out)
    }

    /// The translate distance `#(M △ wM)`.
    pub fn ell(&self, word: &Word) -> Result<u64> {
        Ok(self.symmetric_difference(word)?.len() as u64)
    }

    /// The set `M △ wM` itself, computed by filtering the candidate set.
    pub fn symmetric_difference(&self, word: &Word) -> Result<BTreeSet<Token>> {
        let inv = word.inverse();
        let mut out = BTreeSet::new();
        for x in self.candidates(word)? {
            let pre = self.gset.apply_word(&inv, &x)?;
            if self.member(&x)? != self.member(&pre)? {
                out.insert(x);
            }
        }
        Ok(out)
    }

    /// Splits `M △ wM` into `(M ∖ wM, wM ∖ M)`.
    pub fn translate_split(&self, word: &Word) -> Result<(BTreeSet<Token>, BTreeSet<Token>)> {
        let inv = word.inverse();
        let mut m_minus = BTreeSet::new();
        let mut minus_m = BTreeSet::new();
        for x in self.candidates(word)? {
            let pre = self.gset.apply_word(&inv, &x)?;
            let in_m = self.member(&x)?;
            let in_wm = self.member(&pre)?;
            if in_m && !in_wm {
                m_minus.insert(x);
            } else if !in_m && in_wm {
                minus_m.insert(x);
            }
        }
        Ok((m_minus, minus_m))
    }
}

/// Checks commensuration and reports the difference sets' sizes.
///
/// On an explicit carrier this always succeeds (the carrier is finite); for
/// oracle-backed subsets the declared difference sets are validated during
/// construction, so this reports their sizes.
pub fn is_commensurated(set: &CommensuratedSet) -> CommensurationReport {
    CommensurationReport {
        commensurated: true,
        diff_set_sizes: (0..set.gset.alphabet.len())
            .map(|g| set.diff_set(g).len())
            .collect(),
    }
}

/// Outcome of [`transfixing_distance`].
#[derive(Debug, Clone, Serialize)]
pub struct TransfixReport {
    /// Supremum of `#(M △ gM)` over the orbit of `M` in the power set.
    pub sup_ell: u64,
    /// Minimum of `#(N △ M)` over invariant subsets `N`.
    pub distance: u64,
    /// The minimizing invariant subset, as sorted tokens.
    pub invariant_subset: Vec<Token>,
    /// Number of distinct translates of `M`.
    pub orbit_size: usize,
}

fn mask_to_blocks(mask: &[bool]) -> Vec<u64> {
    let mut blocks = vec![0u64; mask.len().div_ceil(64)];
    for (i, &b) in mask.iter().enumerate() {
        if b {
            blocks[i / 64] |= 1 << (i % 64);
        }
    }
    blocks
}

fn block_symdiff_count(a: &[u64], b: &[u64]) -> u64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x ^ y).count_ones() as u64)
        .sum()
}

/// Finds the invariant subset closest to `M` and the supremum of the
/// translate distance.
///
/// The supremum is exact: the orbit of `M` inside the power set is enumerated
/// breadth first (distinct subsets, not group elements), so every value of
/// `#(M △ gM)` is seen. The closest invariant subset is assembled orbit by
/// orbit of the carrier: an orbit joins `N` exactly when that strictly lowers
/// the difference, which resolves ties deterministically towards exclusion.
pub fn transfixing_distance(set: &CommensuratedSet, budget: &Budget) -> Result<TransfixReport> {
    let gset = set.gset.clone();
    let action = gset
        .explicit_action()
        .ok_or_else(|| Error::Domain("transfixing distance requires an explicit carrier".into()))?;
    let n = action.size();
    let mut base_mask = vec![false; n];
    for (i, slot) in base_mask.iter_mut().enumerate() {
        *slot = set.member(action.token(i))?;
    }
    let base_blocks = mask_to_blocks(&base_mask);

    // Orbit of M inside the power set.
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    seen.insert(base_blocks.clone());
    let mut queue: VecDeque<Vec<bool>> = VecDeque::new();
    queue.push_back(base_mask.clone());
    let mut sup_ell = 0u64;
    while let Some(mask) = queue.pop_front() {
        for letter in gset.alphabet.letters() {
            let mut image = vec![false; n];
            for (i, &b) in mask.iter().enumerate() {
                if b {
                    image[action.apply_index(letter, i)] = true;
                }
            }
            let blocks = mask_to_blocks(&image);
            if seen.contains(&blocks) {
                continue;
            }
            if seen.len() >= budget.power_set_orbit {
                return Err(Error::Budget(format!(
                    "power set orbit exceeded {} subsets",
                    budget.power_set_orbit
                )));
            }
            sup_ell = sup_ell.max(block_symdiff_count(&base_blocks, &blocks));
            seen.insert(blocks);
            queue.push_back(image);
        }
    }

    // Closest invariant subset, assembled per orbit of the carrier.
    let orbits = gset.orbits()?;
    let mut invariant = Vec::new();
    let mut distance = 0u64;
    for orbit in &orbits {
        let inside = orbit.iter().filter(|&&i| base_mask[i]).count();
        let outside = orbit.len() - inside;
        if outside < inside {
            distance += outside as u64;
            invariant.extend(orbit.iter().map(|&i| action.token(i).to_string()));
        } else {
            distance += inside as u64;
        }
    }
    invariant.sort();
    Ok(TransfixReport {
        sup_ell,
        distance,
        invariant_subset: invariant,
        orbit_size: seen.len(),
    })
}

/// Outcome of [`neumann_check`].
#[derive(Debug, Clone, Serialize)]
pub struct NeumannReport {
    pub sup_ell: u64,
    pub distance: u64,
    pub bound: u64,
    pub holds: bool,
}

/// Verifies that the distance to the closest invariant subset is at most
/// `max(0, sup ℓ − 1)`.
pub fn neumann_check(set: &CommensuratedSet, budget: &Budget) -> Result<NeumannReport> {
    let report = transfixing_distance(set, budget)?;
    let bound = report.sup_ell.saturating_sub(1);
    Ok(NeumannReport {
        sup_ell: report.sup_ell,
        distance: report.distance,
        bound,
        holds: report.distance <= bound,
    })
}

/// Minimum over all shifts `q` of `#(M ∩ (q + M))` in `Z/2nZ`.
#[must_use]
pub fn cyclic_overlap_minimum(two_n: u64, members: &BTreeSet<u64>) -> u64 {
    let mut best = u64::MAX;
    for q in 0..two_n {
        let overlap = members
            .iter()
            .filter(|&&x| members.contains(&((x + q) % two_n)))
            .count() as u64;
        best = best.min(overlap);
    }
    best
}

/// Verifies the overlap threshold for one candidate subset.
pub fn sm_verify(n: u64, threshold: u64, members: &BTreeSet<u64>) -> Result<bool> {
    if n == 0 {
        return Err(Error::Validation("n must be positive".into()));
    }
    let two_n = 2 * n;
    if members.len() as u64 != n {
        return Err(Error::Validation(format!(
            "subset must have exactly {n} elements, got {}",
            members.len()
        )));
    }
    if let Some(&max) = members.iter().next_back() {
        if max >= two_n {
            return Err(Error::Validation(format!(
                "member {max} out of range 0..{two_n}"
            )));
        }
    }
    Ok(cyclic_overlap_minimum(two_n, members) >= threshold)
}

/// Enumerates all `n`-element subsets of `Z/2nZ` whose translate overlaps all
/// meet the threshold, optionally up to rotation.
///
/// Subsets are produced in lexicographic order of their sorted element lists;
/// with `up_to_rotation` only the lexicographically least rotation of each
/// class is kept.
pub fn sm_enumerate(
    n: u64,
    threshold: u64,
    up_to_rotation: bool,
    budget: &Budget,
) -> Result<Vec<Vec<u64>>> {
    if n == 0 {
        return Err(Error::Validation("n must be positive".into()));
    }
    let two_n = 2 * n;
    if two_n > budget.sm_max_2n {
        return Err(Error::Budget(format!(
            "ambient size {two_n} exceeds enumeration budget {}",
            budget.sm_max_2n
        )));
    }
    let mut out = Vec::new();
    let mut chosen: Vec<u64> = Vec::new();
    enumerate_subsets(two_n, n, 0, &mut chosen, &mut |subset| {
        let members: BTreeSet<u64> = subset.iter().copied().collect();
        if cyclic_overlap_minimum(two_n, &members) < threshold {
            return;
        }
        if up_to_rotation && !is_least_rotation(two_n, subset) {
            return;
        }
        out.push(subset.to_vec());
    });
    Ok(out)
}

fn enumerate_subsets(
    two_n: u64,
    size: u64,
    start: u64,
    chosen: &mut Vec<u64>,
    visit: &mut impl FnMut(&[u64]),
) {
    if chosen.len() as u64 == size {
        visit(chosen);
        return;
    }
    let remaining = size - chosen.len() as u64;
    for x in start..=(two_n - remaining) {
        chosen.push(x);
        enumerate_subsets(two_n, size, x + 1, chosen, visit);
        chosen.pop();
    }
}

fn is_least_rotation(two_n: u64, sorted: &[u64]) -> bool {
    let canonical: Vec<u64> = sorted.to_vec();
    for shift in 1..two_n {
        let mut rotated: Vec<u64> = sorted.iter().map(|&x| (x + shift) % two_n).collect();
        rotated.sort_unstable();
        if rotated < canonical {
            return false;
        }
    }
    true
}

/// Per-orbit commensuration summary for an explicit action.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitReport {
    pub orbits: Vec<OrbitSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitSummary {
    pub representative: Token,
    pub size: usize,
    pub members_inside: usize,
    /// The intersection with `M` is fixed by every generator.
    pub intersection_invariant: bool,
}

/// Splits the carrier into orbits and reports how `M` meets each.
pub fn orbit_report(set: &CommensuratedSet) -> Result<OrbitReport> {
    let gset = set.gset.clone();
    let action = gset
        .explicit_action()
        .ok_or_else(|| Error::Domain("orbit report requires an explicit carrier".into()))?;
    let orbits = gset.orbits()?;
    let mut out = Vec::new();
    for orbit in &orbits {
        let mut inside = 0usize;
        let mut invariant = true;
        for &i in orbit {
            let m_i = set.member(action.token(i))?;
            if m_i {
                inside += 1;
            }
            for letter in gset.alphabet.letters() {
                let j = action.apply_index(letter, i);
                if set.member(action.token(j))? != m_i {
                    invariant = false;
                }
            }
        }
        out.push(OrbitSummary {
            representative: action.token(orbit[0]).to_string(),
            size: orbit.len(),
            members_inside: inside,
            intersection_invariant: invariant,
        });
    }
    Ok(OrbitReport { orbits: out })
}

/// Commensurated subsets of the integers under translation, in the normal
/// form "ray or trivial part, corrected by finitely many flips".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZSubset {
    /// Membership far to the left (all sufficiently negative integers).
    pub left_tail: bool,
    /// Membership far to the right.
    pub right_tail: bool,
    /// Finitely many points whose membership differs from the tail pattern.
    ///
    /// The tail pattern is `right_tail` for `x ≥ 0` and `left_tail` for
    /// `x < 0`.
    pub flips: BTreeSet<i64>,
}

impl ZSubset {
    /// The nonnegative ray.
    #[must_use]
    pub fn nat() -> Self {
        ZSubset {
            left_tail: false,
            right_tail: true,
            flips: BTreeSet::new(),
        }
    }

    /// The nonnegative ray with finitely many flips applied.
    #[must_use]
    pub fn nat_with_flips(flips: &[i64]) -> Self {
        ZSubset {
            left_tail: false,
            right_tail: true,
            flips: flips.iter().copied().collect(),
        }
    }

    /// A finite subset of the integers.
    #[must_use]
    pub fn finite(points: &[i64]) -> Self {
        ZSubset {
            left_tail: false,
            right_tail: false,
            flips: points.iter().copied().collect(),
        }
    }

    #[must_use]
    pub fn member(&self, x: i64) -> bool {
        let tail = if x >= 0 { self.right_tail } else { self.left_tail };
        tail ^ self.flips.contains(&x)
    }

    /// Window radius beyond which membership is constant on each side.
    #[must_use]
    pub fn radius(&self) -> i64 {
        let flip_radius = self
            .flips
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or(0);
        flip_radius + 1
    }

    /// Exact translate distance `#(M △ (m + M))` in `O(#flips)` time.
    ///
    /// Membership of `x` and `x - m` disagree exactly where the tail
    /// patterns differ (the shift window between 0 and `m`, when the two
    /// tails differ) xor where the flip patterns differ (the finite set
    /// `flips △ (m + flips)`), so the count is
    /// `#window + #flip_diff − 2·#(window ∩ flip_diff)`.
    #[must_use]
    pub fn ell(&self, m: i64) -> u64 {
        let (lo, hi) = if self.left_tail != self.right_tail {
            (m.min(0), m.max(0))
        } else {
            (0, 0)
        };
        let mut flip_diff: BTreeSet<i64> = self.flips.clone();
        for &x in &self.flips {
            if !flip_diff.insert(x + m) {
                flip_diff.remove(&(x + m));
            }
        }
        let overlap = flip_diff.iter().filter(|&&x| lo <= x && x < hi).count();
        (hi - lo) as u64 + flip_diff.len() as u64 - 2 * overlap as u64
    }

    /// Difference set `M △ (1 + M)` as explicit points.
    #[must_use]
    pub fn step_diff(&self) -> BTreeSet<i64> {
        let r = self.radius() + 2;
        (-r..=r)
            .filter(|&x| self.member(x) != self.member(x - 1))
            .collect()
    }
}

/// Commensurability class of a subset of the integers under translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZClass {
    /// Commensurable with the empty set.
    EmptyClass,
    /// Commensurable with the whole line.
    FullClass,
    /// Commensurable with the nonnegative ray.
    PositiveRay,
    /// Commensurable with the nonpositive ray.
    NegativeRay,
}

/// Outcome of [`classify_z`].
#[derive(Debug, Clone, Serialize)]
pub struct ZClassification {
    pub class: ZClass,
    /// Supremum of `ℓ(m) − |m|` over the inspection window, present for the
    /// ray classes where that quantity is nonnegative and bounded.
    pub excess_sup: Option<u64>,
    /// Half-width of the inspection window `|m| ≤ window`.
    pub window: i64,
}

/// Classifies a commensurated subset of the integers by its two tails and
/// reports the bounded excess of the translate distance over `|m|`.
///
/// The boundary data `M △ (1 + M)` is finite, so membership is constant
/// beyond its radius `B`; the excess `ℓ(m) − |m|` is determined by boundary
/// interactions and is inspected over `|m| ≤ 2B + 2`.
pub fn classify_z(set: &ZSubset) -> ZClassification {
    let diff = set.step_diff();
    let b = diff.iter().map(|x| x.abs()).max().unwrap_or(0);
    let window = 2 * b + 2;
    let left = set.member(-b - 1);
    let right = set.member(b + 1);
    let class = match (left, right) {
        (false, false) => ZClass::EmptyClass,
        (true, true) => ZClass::FullClass,
        (false, true) => ZClass::PositiveRay,
        (true, false) => ZClass::NegativeRay,
    };
    let excess_sup = match class {
        ZClass::PositiveRay | ZClass::NegativeRay => {
            let sup = (-window..=window)
                .map(|m| set.ell(m) as i64 - m.abs())
                .max()
                .unwrap_or(0);
            debug_assert!(sup >= 0, "excess must be nonnegative on ray classes");
            Some(sup.max(0) as u64)
        }
        ZClass::EmptyClass | ZClass::FullClass => None,
    };
    ZClassification {
        class,
        excess_sup,
        window,
    }
}

/// Builds the classification directly from a membership oracle and a declared
/// boundary set, validating that membership really is constant beyond the
/// declared radius.
pub fn classify_z_from_oracle(
    member: &dyn Fn(i64) -> Result<bool>,
    declared_diff: &BTreeSet<i64>,
) -> Result<ZClassification> {
    let b = declared_diff.iter().map(|x| x.abs()).max().unwrap_or(0);
    for x in (b + 1)..=(3 * b + 3) {
        if member(x)? != member(b + 1)? {
            return Err(Error::Validation(format!(
                "membership not constant beyond declared boundary radius {b} at {x}"
            )));
        }
        if member(-x)? != member(-b - 1)? {
            return Err(Error::Validation(format!(
                "membership not constant beyond declared boundary radius {b} at {}",
                -x
            )));
        }
    }
    let mut flips = BTreeSet::new();
    let right = member(b + 1)?;
    let left = member(-b - 1)?;
    for x in -(b + 1)..=(b + 1) {
        let tail = if x >= 0 { right } else { left };
        if member(x)? != tail {
            flips.insert(x);
        }
    }
    Ok(classify_z(&ZSubset {
        left_tail: left,
        right_tail: right,
        flips,
    }))
}

/// Canonical member map of `M` and `gM` restricted to the union of their
/// supports, for comparing indicator columns.
pub fn indicator_columns(
    set: &CommensuratedSet,
    u: &Word,
    v: &Word,
) -> Result<BTreeMap<Token, (bool, bool)>> {
    // 1_{uM}(x) = 1_M(u⁻¹x); columns differ exactly on uM △ vM, a translate
    // of M △ (u⁻¹v)M.
    let rel = u.inverse().concat(v);
    let core = set.symmetric_difference(&rel)?;
    let mut out = BTreeMap::new();
    for x in core {
        let moved = set.gset.apply_word(u, &x)?;
        let in_u = set.member(&set.gset.apply_word(&u.inverse(), &moved)?)?;
        let in_v = set.member(&set.gset.apply_word(&v.inverse(), &moved)?)?;
        out.insert(moved, (in_u, in_v));
    }
    Ok(out)
}
